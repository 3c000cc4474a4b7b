//! Rate adaptation: choosing a pool code for the estimated QBER and laying
//! out the extended frame as sifted, shortened, and punctured positions.
//!
//! A frame of `n_fr` symbols carries `n_sb = 0.95·n_fr` sifted bits plus
//! `0.05·n_fr` extension symbols, split between shortened symbols (value
//! known to both parties) and punctured symbols (private random fill).

use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::ldpc::{binary_entropy, CodeRate, ParityCheckMatrix};
use crate::{seed, Error, Result};

/// Sifted bits per frame, `0.95·n_fr`.
pub fn sub_block_len(n_fr: usize) -> usize {
    n_fr / 20 * 19
}

/// Extension symbols per frame, `0.05·n_fr`.
pub fn extension_len(n_fr: usize) -> usize {
    n_fr / 20
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateChoice {
    pub rate: CodeRate,
    pub n_shortened: usize,
    pub n_punctured: usize,
}

/// `⌈h(q_est)·n_fr − n_sb·(1 − R)⌉`, possibly negative or above the extension budget.
pub fn raw_shortened_count(q_est: f64, n_fr: usize, rate: CodeRate) -> Result<i64> {
    let h = binary_entropy(q_est)?;
    let parity_share = (sub_block_len(n_fr) * (20 - rate.twentieths() as usize)) as f64 / 20.0;
    Ok((h * n_fr as f64 - parity_share).ceil() as i64)
}

/// Picks the highest pool rate whose shortened count fits in `[0, Δn_ext]`.
///
/// If even the highest rate wants a negative count the estimate is below
/// the pool's range; the highest rate is used with every extension symbol
/// punctured. If every rate wants more than `Δn_ext` the QBER is too high.
pub fn select_rate(q_est: f64, n_fr: usize, pool_rates: &[CodeRate]) -> Result<RateChoice> {
    if !(q_est > 0.0 && q_est < 0.5) {
        return Err(Error::Domain(format!("q_est {q_est} outside (0, 0.5)")));
    }
    if n_fr == 0 || !n_fr.is_multiple_of(20) {
        return Err(Error::Contract(format!("frame length {n_fr} not a multiple of 20")));
    }
    let mut rates = pool_rates.to_vec();
    rates.sort_unstable_by(|a, b| b.cmp(a));
    rates.dedup();
    let highest = *rates
        .first()
        .ok_or_else(|| Error::Contract("empty rate pool".into()))?;
    let ext = extension_len(n_fr) as i64;

    for &rate in &rates {
        let n_shrt = raw_shortened_count(q_est, n_fr, rate)?;
        if (0..=ext).contains(&n_shrt) {
            return Ok(RateChoice {
                rate,
                n_shortened: n_shrt as usize,
                n_punctured: (ext - n_shrt) as usize,
            });
        }
    }
    if raw_shortened_count(q_est, n_fr, highest)? < 0 {
        return Ok(RateChoice {
            rate: highest,
            n_shortened: 0,
            n_punctured: ext as usize,
        });
    }
    Err(Error::QberTooHigh { q_est })
}

/// Untainted puncturing: walks columns in a seed-determined order and keeps
/// a column only if none of its check rows already touches a kept column.
/// If that runs out early, the remainder is drawn uniformly from the rest.
pub fn choose_punctured(h: &ParityCheckMatrix, n_pnct: usize, seed: u64) -> Result<Vec<usize>> {
    let n = h.n_cols();
    if n_pnct > n {
        return Err(Error::Contract(format!("{n_pnct} punctured of {n} positions")));
    }
    let mut rng = seed::rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut tainted_rows = vec![false; h.n_rows()];
    let mut chosen = vec![false; n];
    let mut selected = Vec::with_capacity(n_pnct);
    for &c in &order {
        if selected.len() == n_pnct {
            break;
        }
        if h.col(c).iter().any(|&r| tainted_rows[r]) {
            continue;
        }
        for &r in h.col(c) {
            tainted_rows[r] = true;
        }
        chosen[c] = true;
        selected.push(c);
    }
    if selected.len() < n_pnct {
        let rest: Vec<usize> = (0..n).filter(|&c| !chosen[c]).collect();
        selected.extend(rest.choose_multiple(&mut rng, n_pnct - selected.len()));
    }
    selected.sort_unstable();
    Ok(selected)
}

/// Uniform pseudo-random `n_shrt`-subset of `free_positions`, sorted.
pub fn choose_shortened(free_positions: &[usize], n_shrt: usize, seed: u64) -> Result<Vec<usize>> {
    if n_shrt > free_positions.len() {
        return Err(Error::Contract(format!(
            "{n_shrt} shortened from {} free positions",
            free_positions.len()
        )));
    }
    let mut out: Vec<usize> = free_positions
        .choose_multiple(&mut seed::rng(seed), n_shrt)
        .copied()
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositionRole {
    Sifted,
    Shortened,
    Punctured,
}

/// Layout of one extended frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionPlan {
    rate: CodeRate,
    shortened: Vec<usize>,
    punctured: Vec<usize>,
    omega: Vec<usize>,
    roles: Vec<PositionRole>,
}

impl ExtensionPlan {
    /// Derives the plan both parties share for one sub-block: punctured
    /// positions first (untainted, from `h`), then shortened positions
    /// among the rest. Both draws depend only on `seed`.
    pub fn build(h: &ParityCheckMatrix, choice: RateChoice, seed: u64) -> Result<Self> {
        let n_fr = h.n_cols();
        if choice.n_shortened + choice.n_punctured != extension_len(n_fr) {
            return Err(Error::Contract(format!(
                "{} + {} extension symbols, frame needs {}",
                choice.n_shortened,
                choice.n_punctured,
                extension_len(n_fr)
            )));
        }
        let punctured = choose_punctured(
            h,
            choice.n_punctured,
            seed::derive(seed, seed::PUNCTURE_POSITIONS),
        )?;
        let mut is_punctured = vec![false; n_fr];
        for &p in &punctured {
            is_punctured[p] = true;
        }
        let free: Vec<usize> = (0..n_fr).filter(|&c| !is_punctured[c]).collect();
        let shortened = choose_shortened(
            &free,
            choice.n_shortened,
            seed::derive(seed, seed::SHORTEN_POSITIONS),
        )?;
        Self::from_parts(n_fr, choice.rate, shortened, punctured)
    }

    /// Builds a plan from explicit position sets; every position not listed
    /// becomes a sifted position, in ascending order.
    pub fn from_parts(
        n_fr: usize,
        rate: CodeRate,
        mut shortened: Vec<usize>,
        mut punctured: Vec<usize>,
    ) -> Result<Self> {
        shortened.sort_unstable();
        punctured.sort_unstable();
        let mut roles = vec![PositionRole::Sifted; n_fr];
        for (set, role) in [
            (&shortened, PositionRole::Shortened),
            (&punctured, PositionRole::Punctured),
        ] {
            for &p in set {
                match roles.get_mut(p) {
                    Some(slot @ PositionRole::Sifted) => *slot = role,
                    Some(_) => {
                        return Err(Error::Contract(format!("position {p} assigned twice")))
                    }
                    None => return Err(Error::Contract(format!("position {p} beyond frame {n_fr}"))),
                }
            }
        }
        let omega = (0..n_fr)
            .filter(|&p| roles[p] == PositionRole::Sifted)
            .collect();
        Ok(ExtensionPlan {
            rate,
            shortened,
            punctured,
            omega,
            roles,
        })
    }

    pub fn rate(&self) -> CodeRate {
        self.rate
    }

    pub fn n_fr(&self) -> usize {
        self.roles.len()
    }

    pub fn shortened(&self) -> &[usize] {
        &self.shortened
    }

    pub fn punctured(&self) -> &[usize] {
        &self.punctured
    }

    /// Positions of the sifted bits in the extended frame (Ω).
    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    pub fn role(&self, position: usize) -> PositionRole {
        self.roles[position]
    }
}

/// A frame-length key: sifted bits at Ω, zeros at shortened positions, and
/// local random fill at punctured positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedKey {
    bits: Vec<u8>,
    plan: Arc<ExtensionPlan>,
}

impl ExtendedKey {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn plan(&self) -> &Arc<ExtensionPlan> {
        &self.plan
    }

    /// Bits at Ω, in Ω order.
    pub fn sifted(&self) -> Vec<u8> {
        self.plan.omega.iter().map(|&p| self.bits[p]).collect()
    }

    pub fn at(&self, positions: &[usize]) -> Vec<u8> {
        positions.iter().map(|&p| self.bits[p]).collect()
    }
}

pub fn build_extended_key(
    sifted: &[u8],
    plan: &Arc<ExtensionPlan>,
    puncture_fill_seed: u64,
) -> Result<ExtendedKey> {
    if sifted.len() != plan.omega.len() {
        return Err(Error::Contract(format!(
            "{} sifted bits for {} sifted positions",
            sifted.len(),
            plan.omega.len()
        )));
    }
    let mut bits = vec![0u8; plan.n_fr()];
    for (&p, &b) in plan.omega.iter().zip(sifted) {
        bits[p] = b & 1;
    }
    let mut rng = seed::rng(puncture_fill_seed);
    for &p in &plan.punctured {
        bits[p] = rng.random_range(0..2);
    }
    Ok(ExtendedKey {
        bits,
        plan: Arc::clone(plan),
    })
}
