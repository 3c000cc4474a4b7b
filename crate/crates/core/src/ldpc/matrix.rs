use crate::{Error, Result};

/// Sparse binary parity-check matrix, stored as sorted row and column
/// adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds a matrix from per-row column index lists.
    ///
    /// Rows are sorted on input. Fails if a row is empty, holds a duplicate
    /// or out-of-range index, or if some column appears in no row.
    pub fn new(n_cols: usize, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.is_empty() || rows.len() >= n_cols {
            return Err(Error::Construction(format!(
                "{} rows for {n_cols} columns",
                rows.len()
            )));
        }
        let mut cols = vec![Vec::new(); n_cols];
        for (j, row) in rows.iter_mut().enumerate() {
            if row.is_empty() {
                return Err(Error::Construction(format!("row {j} is empty")));
            }
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Construction(format!("row {j} has a duplicate index")));
            }
            if let Some(&c) = row.last().filter(|&&c| c >= n_cols) {
                return Err(Error::Construction(format!(
                    "row {j} references column {c} of {n_cols}"
                )));
            }
            for &c in row.iter() {
                cols[c].push(j);
            }
        }
        if let Some(c) = cols.iter().position(Vec::is_empty) {
            return Err(Error::Construction(format!("column {c} is in no row")));
        }
        Ok(ParityCheckMatrix { n_cols, rows, cols })
    }

    /// Builds from a dense row-major 0/1 array of `n_rows × n_cols`.
    pub fn from_dense(n_rows: usize, n_cols: usize, data: &[u8]) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::Contract(format!(
                "dense data has {} entries, expected {}",
                data.len(),
                n_rows * n_cols
            )));
        }
        let rows = data
            .chunks(n_cols)
            .map(|r| (0..n_cols).filter(|&c| r[c] != 0).collect())
            .collect();
        Self::new(n_cols, rows)
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Design rate `1 − n_rows / n_cols`.
    pub fn rate(&self) -> f64 {
        1.0 - self.n_rows() as f64 / self.n_cols as f64
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &[usize] {
        &self.rows[j]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn column_degree(&self, c: usize) -> usize {
        self.cols[c].len()
    }

    /// `s = key · Hᵀ` over GF(2).
    pub fn syndrome(&self, key: &[u8]) -> Result<Vec<u8>> {
        if key.len() != self.n_cols {
            return Err(Error::Contract(format!(
                "key of {} bits against {} columns",
                key.len(),
                self.n_cols
            )));
        }
        Ok(self.syndrome_of(key))
    }

    pub(crate) fn syndrome_of(&self, key: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &c| acc ^ key[c]) & 1)
            .collect()
    }

    pub fn to_dense(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.n_rows() * self.n_cols];
        for (j, row) in self.rows.iter().enumerate() {
            for &c in row {
                out[j * self.n_cols + c] = 1;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn dense_syndrome(dense: &[u8], n_rows: usize, n_cols: usize, key: &[u8]) -> Vec<u8> {
        (0..n_rows)
            .map(|j| {
                let mut acc = 0u32;
                for c in 0..n_cols {
                    acc += u32::from(dense[j * n_cols + c]) * u32::from(key[c]);
                }
                (acc % 2) as u8
            })
            .collect()
    }

    fn random_matrix(rng: &mut impl Rng, n_rows: usize, n_cols: usize) -> Option<ParityCheckMatrix> {
        let data: Vec<u8> = (0..n_rows * n_cols)
            .map(|_| u8::from(rng.random_bool(0.4)))
            .collect();
        ParityCheckMatrix::from_dense(n_rows, n_cols, &data).ok()
    }

    #[test]
    fn rejects_invalid_shapes() {
        assert!(ParityCheckMatrix::new(4, vec![vec![0, 1], vec![]]).is_err());
        assert!(ParityCheckMatrix::new(4, vec![vec![0, 1, 1, 2, 3]]).is_err());
        assert!(ParityCheckMatrix::new(4, vec![vec![0, 1, 2, 4]]).is_err());
        // column 3 unprotected
        assert!(ParityCheckMatrix::new(4, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(ParityCheckMatrix::new(4, vec![vec![3, 0, 1], vec![1, 2]]).is_ok());
    }

    #[test]
    fn zero_key_gives_zero_syndrome() {
        let h = ParityCheckMatrix::new(5, vec![vec![0, 1, 4], vec![1, 2, 3], vec![0, 3]]).unwrap();
        assert_eq!(h.syndrome(&[0; 5]).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn unit_vector_reads_out_column() {
        let h = ParityCheckMatrix::new(5, vec![vec![0, 1, 4], vec![1, 2, 3], vec![0, 3]]).unwrap();
        for c in 0..5 {
            let mut key = vec![0u8; 5];
            key[c] = 1;
            let s = h.syndrome(&key).unwrap();
            let expected: Vec<u8> = (0..3).map(|j| u8::from(h.row(j).contains(&c))).collect();
            assert_eq!(s, expected);
        }
    }

    #[test]
    fn matches_dense_product_on_random_keys() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        let mut checked = 0;
        while checked < 50 {
            let Some(h) = random_matrix(&mut rng, 8, 20) else { continue };
            let key: Vec<u8> = (0..20).map(|_| rng.random_range(0..2)).collect();
            let dense = h.to_dense();
            assert_eq!(h.syndrome(&key).unwrap(), dense_syndrome(&dense, 8, 20, &key));
            checked += 1;
        }
    }

    #[test]
    fn length_mismatch_is_contract_error() {
        let h = ParityCheckMatrix::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(matches!(h.syndrome(&[0; 3]), Err(Error::Contract(_))));
    }

    proptest! {
        #[test]
        fn syndrome_is_linear(seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            if let Some(h) = random_matrix(&mut rng, 6, 14) {
                let a: Vec<u8> = (0..14).map(|_| rng.random_range(0..2)).collect();
                let b: Vec<u8> = (0..14).map(|_| rng.random_range(0..2)).collect();
                let sum = crate::bits::xor(&a, &b);
                let lhs = h.syndrome(&sum).unwrap();
                let rhs = crate::bits::xor(&h.syndrome(&a).unwrap(), &h.syndrome(&b).unwrap());
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
