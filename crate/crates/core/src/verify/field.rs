use crate::{Error, Result};

/// `2^50 − 27`.
pub const DEFAULT_PRIME: u64 = (1 << 50) - 27;

/// Prime modulus with its derived chunk and tag lengths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldParams {
    p: u64,
    chunk_bits: usize,
    tag_bits: usize,
}

impl FieldParams {
    /// Fails unless `p` is a prime below `2^63`.
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 63 {
            return Err(Error::Domain(format!("modulus {p} exceeds 63 bits")));
        }
        if !is_prime(p) {
            return Err(Error::Domain(format!("modulus {p} is not prime")));
        }
        let bit_len = 64 - p.leading_zeros() as usize;
        Ok(FieldParams {
            p,
            // ⌊log2 p⌋
            chunk_bits: bit_len - 1,
            // ⌈log2 p⌉
            tag_bits: if p.is_power_of_two() { bit_len - 1 } else { bit_len },
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `l_p = ⌊log2 p⌋`.
    pub fn chunk_bits(&self) -> usize {
        self.chunk_bits
    }

    /// `l_ht = ⌈log2 p⌉`.
    pub fn tag_bits(&self) -> usize {
        self.tag_bits
    }

    pub(crate) fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }

    pub(crate) fn add(&self, a: u64, b: u64) -> u64 {
        ((u128::from(a) + u128::from(b)) % u128::from(self.p)) as u64
    }
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams::new(DEFAULT_PRIME).expect("default modulus is prime")
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; these twelve bases decide every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn agrees_with_trial_division() {
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial_division(n), "{n}");
        }
        // strong pseudoprimes to several small bases
        for n in [3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321] {
            assert!(!is_prime(n));
        }
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn default_field() {
        let f = FieldParams::default();
        assert_eq!(f.p(), 1_125_899_906_842_597);
        assert_eq!(f.chunk_bits(), 49);
        assert_eq!(f.tag_bits(), 50);
    }

    #[test]
    fn default_modulus_is_prime_by_trial_division() {
        // sqrt(2^50) = 2^25, so this is a complete proof
        let p = DEFAULT_PRIME;
        let mut d = 3u64;
        while d * d <= p {
            assert_ne!(p % d, 0);
            d += 2;
        }
    }

    #[test]
    fn small_field() {
        let f = FieldParams::new(251).unwrap();
        assert_eq!((f.chunk_bits(), f.tag_bits()), (7, 8));
        let f = FieldParams::new(2).unwrap();
        assert_eq!((f.chunk_bits(), f.tag_bits()), (1, 1));
    }

    #[test]
    fn composite_modulus_is_refused() {
        assert!(matches!(FieldParams::new(1 << 50), Err(Error::Domain(_))));
        assert!(FieldParams::new(255).is_err());
        assert!(FieldParams::new(1).is_err());
        assert!(FieldParams::new(u64::MAX - 58).is_err());
    }
}
