//! LDPC codes: sparse parity-check matrices, their construction, and the
//! nine-rate code pool used for rate adaptation.

mod alist;
mod matrix;
mod peg;
mod pool;

use std::fmt;

pub use alist::{load_alist, parse_alist, save_alist, write_alist};
pub use matrix::ParityCheckMatrix;
pub use peg::peg_generate;
pub use pool::{default_distributions, CodePool, DegreeDistribution, DEFAULT_POOL_SEED};

use crate::{Error, Result};

/// Binary entropy in bits, with `0·log2(0) = 0`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("binary entropy of {q}")));
    }
    let term = |p: f64| if p == 0.0 { 0.0 } else { -p * p.log2() };
    Ok(term(q) + term(1.0 - q))
}

/// A pool code rate, stored exactly as a multiple of 1/20.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodeRate(u8);

impl CodeRate {
    /// The nine pool rates, highest first: 0.90, 0.85, ..., 0.50.
    pub const POOL: [CodeRate; 9] = [
        CodeRate(18),
        CodeRate(17),
        CodeRate(16),
        CodeRate(15),
        CodeRate(14),
        CodeRate(13),
        CodeRate(12),
        CodeRate(11),
        CodeRate(10),
    ];

    pub fn from_twentieths(t: u8) -> Result<Self> {
        if (1..20).contains(&t) {
            Ok(CodeRate(t))
        } else {
            Err(Error::Domain(format!("rate {t}/20 outside (0, 1)")))
        }
    }

    /// Parses "0.90"-style strings; only exact multiples of 0.05 are accepted.
    pub fn parse(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("not a rate: {s:?}")))?;
        let t = (v * 20.0).round();
        if (v * 20.0 - t).abs() > 1e-9 {
            return Err(Error::Domain(format!("rate {s} is not a multiple of 0.05")));
        }
        Self::from_twentieths(t as u8)
    }

    pub fn twentieths(self) -> u8 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 20.0
    }

    /// `(1 − R)·n_fr`; `n_fr` must be a multiple of 20.
    pub fn syndrome_len(self, n_fr: usize) -> usize {
        n_fr / 20 * (20 - self.0 as usize)
    }

    /// Disclosure size per extra round, `⌈56 − 40R⌉ = 56 − 2t` for `R = t/20`.
    pub fn disclosure_size(self) -> usize {
        56 - 2 * self.0 as usize
    }

    pub(crate) fn alist_file_name(self) -> String {
        format!("r{self}.alist")
    }
}

impl fmt::Display for CodeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 20, (self.0 % 20) * 5)
    }
}

impl serde::Serialize for CodeRate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
