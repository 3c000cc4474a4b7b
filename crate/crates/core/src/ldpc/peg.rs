use rand::seq::SliceRandom;

use super::{DegreeDistribution, ParityCheckMatrix};
use crate::{seed, Error, Result};

/// Progressive edge growth.
///
/// Column degrees follow `dist` (largest-remainder rounding); the seed only
/// decides which columns receive which degree. Columns are then processed in
/// order of increasing degree. Each new edge goes to a check row at maximal
/// distance from the column in the current Tanner graph (or to an unreachable
/// row when one exists), breaking ties by lowest row degree and then lowest
/// row index.
pub fn peg_generate(
    n_cols: usize,
    n_rows: usize,
    dist: &DegreeDistribution,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    if n_rows == 0 || n_rows >= n_cols {
        return Err(Error::Construction(format!(
            "PEG needs 0 < n_rows < n_cols, got {n_rows} x {n_cols}"
        )));
    }
    let counts = dist.column_degree_counts(n_cols);
    if let Some(&(d, _)) = counts.iter().find(|&&(d, c)| c > 0 && d > n_rows) {
        return Err(Error::Construction(format!(
            "column degree {d} exceeds {n_rows} rows"
        )));
    }

    let mut columns: Vec<usize> = (0..n_cols).collect();
    columns.shuffle(&mut seed::rng(seed));
    let degrees = counts
        .iter()
        .flat_map(|&(d, c)| std::iter::repeat_n(d, c));

    let mut graph = Graph::new(n_cols, n_rows);
    for (col, degree) in columns.into_iter().zip(degrees) {
        for k in 0..degree {
            let row = if k == 0 {
                graph.least_loaded(|_| true)
            } else {
                graph.farthest_row(col)
            };
            graph.connect(col, row);
        }
    }
    ParityCheckMatrix::new(n_cols, graph.row_adj)
}

struct Graph {
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
    row_seen: Vec<u32>,
    col_seen: Vec<u32>,
    epoch: u32,
}

impl Graph {
    fn new(n_cols: usize, n_rows: usize) -> Self {
        Graph {
            row_adj: vec![Vec::new(); n_rows],
            col_adj: vec![Vec::new(); n_cols],
            row_seen: vec![0; n_rows],
            col_seen: vec![0; n_cols],
            epoch: 0,
        }
    }

    fn connect(&mut self, col: usize, row: usize) {
        self.row_adj[row].push(col);
        self.col_adj[col].push(row);
    }

    /// Lowest-degree row among those accepted by `allow`, lowest index on ties.
    fn least_loaded(&self, allow: impl Fn(usize) -> bool) -> usize {
        (0..self.row_adj.len())
            .filter(|&r| allow(r))
            .min_by_key(|&r| (self.row_adj[r].len(), r))
            .expect("candidate set is never empty")
    }

    /// Breadth-first expansion from `col`; returns the row to connect next.
    fn farthest_row(&mut self, col: usize) -> usize {
        self.epoch += 1;
        let epoch = self.epoch;
        let n_rows = self.row_adj.len();
        self.col_seen[col] = epoch;
        let mut frontier = vec![col];
        let mut reached = 0;
        loop {
            let mut layer = Vec::new();
            for &c in &frontier {
                for &r in &self.col_adj[c] {
                    if self.row_seen[r] != epoch {
                        self.row_seen[r] = epoch;
                        layer.push(r);
                    }
                }
            }
            if layer.is_empty() {
                // Expansion stalled: some rows are unreachable from `col`.
                let seen = &self.row_seen;
                return self.least_loaded(|r| seen[r] != epoch);
            }
            reached += layer.len();
            if reached == n_rows {
                // The last layer holds the rows farthest from `col`.
                return *layer
                    .iter()
                    .min_by_key(|&&r| (self.row_adj[r].len(), r))
                    .expect("layer is non-empty");
            }
            frontier.clear();
            for &r in &layer {
                for &c in &self.row_adj[r] {
                    if self.col_seen[c] != epoch {
                        self.col_seen[c] = epoch;
                        frontier.push(c);
                    }
                }
            }
        }
    }
}
