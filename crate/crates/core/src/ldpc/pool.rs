use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use super::{load_alist, peg_generate, save_alist, CodeRate, ParityCheckMatrix};
use crate::{Error, Result};

pub const DEFAULT_POOL_SEED: u64 = 0x5b3c_2017;

const DEFAULT_DISTRIBUTIONS: &str = include_str!("../../data/degree_distributions.toml");

/// Column-degree distribution in node perspective.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    fractions: BTreeMap<usize, f64>,
}

impl DegreeDistribution {
    pub fn new(fractions: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (d, f) in fractions {
            if d < 2 {
                return Err(Error::Construction(format!("column degree {d} below 2")));
            }
            if !(f >= 0.0 && f.is_finite()) {
                return Err(Error::Construction(format!("fraction {f} for degree {d}")));
            }
            *map.entry(d).or_insert(0.0) += f;
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Construction(format!("fractions sum to {total}")));
        }
        Ok(DegreeDistribution { fractions: map })
    }

    pub fn regular(degree: usize) -> Result<Self> {
        Self::new([(degree, 1.0)])
    }

    pub fn fractions(&self) -> &BTreeMap<usize, f64> {
        &self.fractions
    }

    /// Column counts per degree for `n_cols` columns, ascending by degree.
    ///
    /// Largest-remainder rounding; equal remainders favour the lower degree.
    pub fn column_degree_counts(&self, n_cols: usize) -> Vec<(usize, usize)> {
        let quotas: Vec<(usize, f64)> = self
            .fractions
            .iter()
            .map(|(&d, &f)| (d, f * n_cols as f64))
            .collect();
        let mut counts: Vec<(usize, usize)> =
            quotas.iter().map(|&(d, q)| (d, q.floor() as usize)).collect();
        let assigned: usize = counts.iter().map(|c| c.1).sum();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a].1 - quotas[a].1.floor();
            let rb = quotas[b].1 - quotas[b].1.floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().cycle().take(n_cols.saturating_sub(assigned)) {
            counts[i].1 += 1;
        }
        counts
    }

    pub fn mean_column_degree(&self) -> f64 {
        self.fractions.iter().map(|(&d, &f)| d as f64 * f).sum()
    }

    /// Average row degree implied for an `n_rows × n_cols` matrix.
    pub fn row_degree_target(&self, n_cols: usize, n_rows: usize) -> f64 {
        self.mean_column_degree() * n_cols as f64 / n_rows as f64
    }
}

#[derive(Deserialize)]
struct DistributionFile {
    version: u32,
    rates: BTreeMap<String, RateEntry>,
}

#[derive(Deserialize)]
struct RateEntry {
    column_degrees: BTreeMap<String, f64>,
}

/// The shipped per-rate default distributions, highest rate first, with the file version.
pub fn default_distributions() -> Result<(u32, Vec<(CodeRate, DegreeDistribution)>)> {
    parse_distributions(DEFAULT_DISTRIBUTIONS)
}

fn parse_distributions(text: &str) -> Result<(u32, Vec<(CodeRate, DegreeDistribution)>)> {
    let file: DistributionFile = toml::from_str(text)
        .map_err(|e| Error::Construction(format!("degree distribution file: {e}")))?;
    let mut out = Vec::new();
    for rate in CodeRate::POOL {
        let entry = file
            .rates
            .get(&rate.to_string())
            .ok_or_else(|| Error::Construction(format!("no distribution for rate {rate}")))?;
        let pairs = entry
            .column_degrees
            .iter()
            .map(|(d, &f)| {
                d.parse::<usize>()
                    .map(|d| (d, f))
                    .map_err(|_| Error::Construction(format!("bad degree key {d:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((rate, DegreeDistribution::new(pairs)?));
    }
    if file.rates.len() != CodeRate::POOL.len() {
        return Err(Error::Construction("distribution file lists extra rates".into()));
    }
    Ok((file.version, out))
}

struct PoolEntry {
    rate: CodeRate,
    dist: Option<DegreeDistribution>,
    matrix: OnceLock<std::result::Result<ParityCheckMatrix, String>>,
}

/// Nine LDPC codes, one per pool rate, all of frame length `n_fr`.
///
/// Generated pools build each matrix on first use, so callers that only
/// ever need one rate do not pay for the other eight. Matrices are immutable
/// once built and the pool is safe to share across threads.
pub struct CodePool {
    n_fr: usize,
    seed: u64,
    entries: Vec<PoolEntry>,
}

impl std::fmt::Debug for CodePool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CodePool")
            .field("n_fr", &self.n_fr)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl CodePool {
    fn check_frame_length(n_fr: usize) -> Result<()> {
        if n_fr == 0 || !n_fr.is_multiple_of(20) {
            return Err(Error::Construction(format!(
                "frame length {n_fr} is not a positive multiple of 20"
            )));
        }
        Ok(())
    }

    /// PEG pool from the shipped default distributions.
    pub fn generate(n_fr: usize, seed: u64) -> Result<Self> {
        let (_, dists) = default_distributions()?;
        Self::with_distributions(n_fr, seed, dists)
    }

    pub fn with_distributions(
        n_fr: usize,
        seed: u64,
        dists: Vec<(CodeRate, DegreeDistribution)>,
    ) -> Result<Self> {
        Self::check_frame_length(n_fr)?;
        let mut by_rate: BTreeMap<CodeRate, DegreeDistribution> = dists.into_iter().collect();
        let entries = CodeRate::POOL
            .iter()
            .map(|&rate| {
                let dist = by_rate
                    .remove(&rate)
                    .ok_or_else(|| Error::Construction(format!("no distribution for {rate}")))?;
                Ok(PoolEntry {
                    rate,
                    dist: Some(dist),
                    matrix: OnceLock::new(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CodePool {
            n_fr,
            seed,
            entries,
        })
    }

    /// Pool from nine explicit matrices.
    pub fn from_matrices(matrices: impl IntoIterator<Item = (CodeRate, ParityCheckMatrix)>) -> Result<Self> {
        let mut by_rate: BTreeMap<CodeRate, ParityCheckMatrix> = BTreeMap::new();
        for (rate, h) in matrices {
            if by_rate.insert(rate, h).is_some() {
                return Err(Error::Construction(format!("rate {rate} given twice")));
            }
        }
        if by_rate.len() != CodeRate::POOL.len() || !CodeRate::POOL.iter().all(|r| by_rate.contains_key(r)) {
            return Err(Error::Construction(
                "a code pool needs exactly the nine rates 0.90..0.50".into(),
            ));
        }
        let n_fr = by_rate.values().next().map(ParityCheckMatrix::n_cols).unwrap_or(0);
        Self::check_frame_length(n_fr)?;
        let mut entries = Vec::new();
        for rate in CodeRate::POOL {
            let h = by_rate.remove(&rate).expect("checked above");
            if h.n_cols() != n_fr {
                return Err(Error::Construction(format!(
                    "rate {rate} has frame length {}, pool uses {n_fr}",
                    h.n_cols()
                )));
            }
            if h.n_rows() != rate.syndrome_len(n_fr) {
                return Err(Error::Construction(format!(
                    "rate {rate} matrix has {} rows, expected {}",
                    h.n_rows(),
                    rate.syndrome_len(n_fr)
                )));
            }
            entries.push(PoolEntry {
                rate,
                dist: None,
                matrix: OnceLock::from(Ok(h)),
            });
        }
        Ok(CodePool {
            n_fr,
            seed: 0,
            entries,
        })
    }

    /// Loads `r0.90.alist` ... `r0.50.alist` from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let matrices = CodeRate::POOL
            .iter()
            .map(|&rate| Ok((rate, load_alist(dir.join(rate.alist_file_name()))?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_matrices(matrices)
    }

    /// Writes every matrix (building any not yet generated) to `dir`.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for rate in CodeRate::POOL {
            save_alist(self.code(rate)?, dir.join(rate.alist_file_name()))?;
        }
        Ok(())
    }

    pub fn n_fr(&self) -> usize {
        self.n_fr
    }

    pub fn rates(&self) -> impl Iterator<Item = CodeRate> + '_ {
        self.entries.iter().map(|e| e.rate)
    }

    pub fn code(&self, rate: CodeRate) -> Result<&ParityCheckMatrix> {
        let entry = self
            .entries
            .iter()
            .find(|e| e.rate == rate)
            .ok_or_else(|| Error::Contract(format!("rate {rate} not in pool")))?;
        entry
            .matrix
            .get_or_init(|| {
                let dist = entry.dist.as_ref().expect("lazy entries carry a distribution");
                let seed = crate::seed::derive(self.seed, u64::from(rate.twentieths()));
                peg_generate(self.n_fr, rate.syndrome_len(self.n_fr), dist, seed)
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| Error::Construction(e.clone()))
    }
}
