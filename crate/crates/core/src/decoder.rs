//! Syndrome-based belief propagation.
//!
//! Decoding works on the error pattern `e = k_A ⊕ k_B` directly: the target
//! is the relative syndrome `Δs = s_A ⊕ s_B`, and each check node enforces
//! that the error bits on its row sum to its syndrome bit. LLRs are
//! `ln(P[e=0] / P[e=1])`, so positive means "probably no error".

use std::collections::BTreeMap;

use crate::ldpc::{CodeRate, ParityCheckMatrix};
use crate::rate_adapt::{ExtensionPlan, PositionRole};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Bound on the magnitude of every message and posterior.
    pub llr_clamp: f64,
    /// Prior magnitude for positions whose error bit is known.
    pub known_llr_magnitude: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            max_iterations: 60,
            llr_clamp: 25.0,
            known_llr_magnitude: 25.0,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Contract("max_iterations must be at least 1".into()));
        }
        if !(self.llr_clamp > 0.0 && self.llr_clamp.is_finite()) {
            return Err(Error::Contract(format!("llr_clamp {}", self.llr_clamp)));
        }
        if !(self.known_llr_magnitude > 0.0 && self.known_llr_magnitude <= self.llr_clamp) {
            return Err(Error::Contract(format!(
                "known_llr_magnitude {} must lie in (0, llr_clamp]",
                self.known_llr_magnitude
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// Wraps raw values, rejecting non-finite entries and magnitudes above `clamp`.
    pub fn new(values: Vec<f64>, clamp: f64) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || v.abs() > clamp) {
            return Err(Error::Contract(format!("LLR {v} outside ±{clamp}")));
        }
        Ok(LlrVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub converged: bool,
    pub error_pattern: Vec<u8>,
    pub final_llrs: LlrVector,
    pub iterations_used: usize,
}

/// Channel priors for one decoding attempt.
///
/// `known_error_bits` must cover every shortened position of `plan`, and may
/// also contain positions disclosed since (which then count as known).
pub fn init_llrs(
    q_est: f64,
    plan: &ExtensionPlan,
    known_error_bits: &BTreeMap<usize, u8>,
    config: &DecoderConfig,
) -> Result<LlrVector> {
    if !(q_est > 0.0 && q_est < 0.5) {
        return Err(Error::Domain(format!("q_est {q_est} outside (0, 0.5)")));
    }
    config.validate()?;
    if let Some(p) = plan.shortened().iter().find(|p| !known_error_bits.contains_key(p)) {
        return Err(Error::Contract(format!("shortened position {p} has no known error bit")));
    }
    let channel = ((1.0 - q_est) / q_est).ln().min(config.llr_clamp);
    let mut values: Vec<f64> = (0..plan.n_fr())
        .map(|p| match plan.role(p) {
            PositionRole::Punctured => 0.0,
            _ => channel,
        })
        .collect();
    for (&p, &bit) in known_error_bits {
        let slot = values
            .get_mut(p)
            .ok_or_else(|| Error::Contract(format!("known position {p} beyond frame")))?;
        *slot = if bit == 0 {
            config.known_llr_magnitude
        } else {
            -config.known_llr_magnitude
        };
    }
    Ok(LlrVector(values))
}

// Bound on the LLR magnitude a product of ratios may reach before overflow.
const MAX_RATIO_EXPONENT: f64 = 700.0;

/// Sum-product decoding of `delta_s` under the given priors.
///
/// Flooding schedule with the exact tanh rule. After every iteration the
/// posterior hard decision is tested against `delta_s`; the first match
/// returns `converged = true`.
pub fn bp_decode(
    delta_s: &[u8],
    priors: &LlrVector,
    h: &ParityCheckMatrix,
    config: &DecoderConfig,
) -> Result<DecodeResult> {
    config.validate()?;
    if delta_s.len() != h.n_rows() || priors.len() != h.n_cols() {
        return Err(Error::Contract(format!(
            "syndrome {} / priors {} against a {} x {} matrix",
            delta_s.len(),
            priors.len(),
            h.n_rows(),
            h.n_cols()
        )));
    }
    let clamp = config.llr_clamp;
    let max_degree = (0..h.n_cols()).map(|c| h.column_degree(c)).max().unwrap_or(0);
    if (max_degree + 1) as f64 * clamp > MAX_RATIO_EXPONENT {
        return Err(Error::Contract(format!(
            "llr_clamp {clamp} too large for column degree {max_degree}"
        )));
    }
    let prior: Vec<f64> = priors.values().iter().map(|v| v.clamp(-clamp, clamp)).collect();

    // Edges are numbered row by row; column c owns `col_edge[col_start[c]..col_start[c + 1]]`.
    let mut row_start = Vec::with_capacity(h.n_rows() + 1);
    let mut edge_col = Vec::with_capacity(h.edge_count());
    for row in h.rows() {
        row_start.push(edge_col.len());
        edge_col.extend_from_slice(row);
    }
    row_start.push(edge_col.len());
    let mut col_start = vec![0usize; h.n_cols() + 1];
    for &c in &edge_col {
        col_start[c + 1] += 1;
    }
    for c in 0..h.n_cols() {
        col_start[c + 1] += col_start[c];
    }
    let mut fill = col_start.clone();
    let mut col_edge = vec![0usize; edge_col.len()];
    for (e, &c) in edge_col.iter().enumerate() {
        col_edge[fill[c]] = e;
        fill[c] += 1;
    }

    // Messages are carried as likelihood ratios `ρ = e^LLR`: the tanh rule
    // becomes `tanh(m/2) = (ρ − 1)/(ρ + 1)` and LLR sums become products,
    // so the iterations need no transcendental calls. Clamping `|LLR| ≤ c`
    // is clamping `ρ` to `[e^−c, e^c]`.
    let hi = clamp.exp();
    let lo = (-clamp).exp();
    let prior: Vec<f64> = prior.iter().map(|v| v.exp()).collect();
    let mut v2c: Vec<f64> = edge_col.iter().map(|&c| prior[c]).collect();
    let mut c2v = vec![1.0f64; edge_col.len()];
    let mut posterior = prior.clone();
    let mut pattern = vec![0u8; h.n_cols()];
    let mut tanhs = Vec::new();
    let mut suffix = Vec::new();
    let llrs = |posterior: &[f64]| LlrVector(posterior.iter().map(|r| r.ln().clamp(-clamp, clamp)).collect());

    for iteration in 1..=config.max_iterations {
        for (j, &s) in delta_s.iter().enumerate() {
            let edges = row_start[j]..row_start[j + 1];
            let sign = if s & 1 == 0 { 1.0 } else { -1.0 };
            tanhs.clear();
            tanhs.extend(v2c[edges.clone()].iter().map(|&r| (r - 1.0) / (r + 1.0)));
            // product over the other edges of the row, via suffix products
            suffix.clear();
            suffix.resize(tanhs.len() + 1, 1.0);
            for k in (0..tanhs.len()).rev() {
                suffix[k] = suffix[k + 1] * tanhs[k];
            }
            let mut prefix = sign;
            for ((out, &t), &after) in c2v[edges].iter_mut().zip(&tanhs).zip(&suffix[1..]) {
                let y: f64 = prefix * after;
                // 2·atanh(y) in the ratio domain; y = ±1 maps to 0 or ∞ and is clamped
                *out = ((1.0 + y) / (1.0 - y)).clamp(lo, hi);
                prefix *= t;
            }
        }

        for (c, window) in col_start.windows(2).enumerate() {
            let edges = &col_edge[window[0]..window[1]];
            let total = prior[c] * edges.iter().map(|&e| c2v[e]).product::<f64>();
            for &e in edges {
                v2c[e] = (total / c2v[e]).clamp(lo, hi);
            }
            posterior[c] = total.clamp(lo, hi);
            pattern[c] = u8::from(posterior[c] < 1.0);
        }
        debug_assert!(c2v.iter().chain(&v2c).chain(&posterior).all(|r| (lo..=hi).contains(r)));

        let satisfied = delta_s.iter().enumerate().all(|(j, &s)| {
            edge_col[row_start[j]..row_start[j + 1]]
                .iter()
                .fold(0u8, |acc, &c| acc ^ pattern[c])
                == s & 1
        });
        if satisfied {
            return Ok(DecodeResult {
                converged: true,
                error_pattern: pattern,
                final_llrs: llrs(&posterior),
                iterations_used: iteration,
            });
        }
    }
    Ok(DecodeResult {
        converged: false,
        error_pattern: pattern,
        final_llrs: llrs(&posterior),
        iterations_used: config.max_iterations,
    })
}

/// The `⌈56 − 40R⌉` eligible positions with the least confident final LLRs,
/// returned in ascending position order.
pub fn select_disclosure(result: &DecodeResult, rate: CodeRate, eligible: &[usize]) -> Result<Vec<usize>> {
    least_confident(result.final_llrs.values(), eligible, rate.disclosure_size())
}

/// `d` positions from `eligible` with smallest `|llr|`, ties to the lower index.
pub fn least_confident(llrs: &[f64], eligible: &[usize], d: usize) -> Result<Vec<usize>> {
    if eligible.len() < d {
        return Err(Error::SubBlockExhausted {
            eligible: eligible.len(),
            needed: d,
        });
    }
    if let Some(p) = eligible.iter().find(|&&p| p >= llrs.len()) {
        return Err(Error::Contract(format!("eligible position {p} beyond frame")));
    }
    let mut ranked = eligible.to_vec();
    ranked.sort_by(|&a, &b| llrs[a].abs().total_cmp(&llrs[b].abs()).then(a.cmp(&b)));
    ranked.truncate(d);
    ranked.sort_unstable();
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::{peg_generate, DegreeDistribution};
    use rand::{Rng, SeedableRng};

    /// Minimal-weight patterns with syndrome `s`, by enumeration of all 2^n.
    fn coset_leaders(h: &ParityCheckMatrix, s: &[u8]) -> Vec<Vec<u8>> {
        let n = h.n_cols();
        let mut best: Vec<Vec<u8>> = Vec::new();
        let mut best_w = usize::MAX;
        for mask in 0u32..(1 << n) {
            let e: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            let w = mask.count_ones() as usize;
            if w > best_w {
                continue;
            }
            if h.syndrome(&e).unwrap() == s {
                if w < best_w {
                    best.clear();
                    best_w = w;
                }
                best.push(e);
            }
        }
        best
    }

    fn uniform_priors(n: usize, q: f64) -> LlrVector {
        LlrVector(vec![((1.0 - q) / q).ln(); n])
    }

    fn toy_h() -> ParityCheckMatrix {
        ParityCheckMatrix::from_dense(
            3,
            6,
            &[1, 1, 0, 1, 0, 0, 0, 1, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1],
        )
        .unwrap()
    }

    #[test]
    fn llr_initialisation() {
        let plan = ExtensionPlan::from_parts(6, CodeRate::POOL[0], vec![1, 4], vec![2]).unwrap();
        let known: BTreeMap<usize, u8> = [(1, 0), (4, 1)].into_iter().collect();
        let cfg = DecoderConfig::default();
        let llr = init_llrs(0.02, &plan, &known, &cfg).unwrap();
        let v = llr.values();
        assert_eq!(v[2], 0.0);
        assert_eq!(v[1], 25.0);
        assert_eq!(v[4], -25.0);
        assert!((v[0] - 3.891_820).abs() < 1e-6);
        assert_eq!(v[0], v[5]);

        let partial: BTreeMap<usize, u8> = [(1, 0)].into_iter().collect();
        assert!(matches!(init_llrs(0.02, &plan, &partial, &cfg), Err(Error::Contract(_))));
        assert!(matches!(init_llrs(0.5, &plan, &known, &cfg), Err(Error::Domain(_))));
        assert!(matches!(init_llrs(0.0, &plan, &known, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn disclosed_position_overrides_role() {
        let plan = ExtensionPlan::from_parts(6, CodeRate::POOL[0], vec![1], vec![2]).unwrap();
        let known: BTreeMap<usize, u8> = [(1, 0), (2, 1), (5, 0)].into_iter().collect();
        let llr = init_llrs(0.05, &plan, &known, &DecoderConfig::default()).unwrap();
        assert_eq!(llr.values()[2], -25.0);
        assert_eq!(llr.values()[5], 25.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = DecoderConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.max_iterations = 0;
        assert!(cfg.validate().is_err());
        let cfg = DecoderConfig { known_llr_magnitude: 30.0, ..DecoderConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn oversized_clamp_is_rejected() {
        let h = toy_h();
        let cfg = DecoderConfig {
            llr_clamp: 400.0,
            known_llr_magnitude: 25.0,
            ..DecoderConfig::default()
        };
        let err = bp_decode(&[0, 0, 0], &LlrVector(vec![1.0; 6]), &h, &cfg).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn trivial_instance_converges_immediately() {
        let h = toy_h();
        let r = bp_decode(&[0, 0, 0], &LlrVector(vec![10.0; 6]), &h, &DecoderConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations_used, 1);
        assert_eq!(r.error_pattern, vec![0; 6]);
    }

    #[test]
    fn single_error_matches_brute_force() {
        let h = toy_h();
        let priors = uniform_priors(6, 0.05);
        for pos in 0..6 {
            let mut e = vec![0u8; 6];
            e[pos] = 1;
            let s = h.syndrome(&e).unwrap();
            let leaders = coset_leaders(&h, &s);
            assert_eq!(leaders.len(), 1);
            let r = bp_decode(&s, &priors, &h, &DecoderConfig::default()).unwrap();
            assert!(r.converged, "position {pos}");
            assert_eq!(r.error_pattern, leaders[0], "position {pos}");
        }
    }

    #[test]
    fn budget_exhaustion_reports_clamped_llrs() {
        let h = peg_generate(40, 20, &DegreeDistribution::regular(3).unwrap(), 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let e: Vec<u8> = (0..40).map(|_| u8::from(rng.random_bool(0.3))).collect();
        let s = h.syndrome(&e).unwrap();
        let cfg = DecoderConfig { max_iterations: 1, ..DecoderConfig::default() };
        let r = bp_decode(&s, &uniform_priors(40, 0.01), &h, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 1);
        assert!(r.final_llrs.values().iter().all(|v| v.is_finite() && v.abs() <= 25.0));
    }

    #[test]
    fn saturated_priors_stay_finite() {
        let h = toy_h();
        let cfg = DecoderConfig::default();
        let priors = LlrVector(vec![25.0, -25.0, 25.0, 0.0, 25.0, -25.0]);
        let r = bp_decode(&[1, 0, 1], &priors, &h, &cfg).unwrap();
        assert!(r.final_llrs.values().iter().all(|v| v.is_finite() && v.abs() <= 25.0));
    }

    #[test]
    fn dimension_mismatch() {
        let h = toy_h();
        let cfg = DecoderConfig::default();
        assert!(bp_decode(&[0, 0], &uniform_priors(6, 0.1), &h, &cfg).is_err());
        assert!(bp_decode(&[0, 0, 0], &uniform_priors(5, 0.1), &h, &cfg).is_err());
    }

    #[test]
    fn deterministic() {
        let h = peg_generate(60, 30, &DegreeDistribution::regular(3).unwrap(), 4).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let e: Vec<u8> = (0..60).map(|_| u8::from(rng.random_bool(0.05))).collect();
        let s = h.syndrome(&e).unwrap();
        let cfg = DecoderConfig::default();
        let a = bp_decode(&s, &uniform_priors(60, 0.05), &h, &cfg).unwrap();
        let b = bp_decode(&s, &uniform_priors(60, 0.05), &h, &cfg).unwrap();
        assert_eq!(a, b);
        if a.converged {
            assert_eq!(h.syndrome(&a.error_pattern).unwrap(), s);
        }
    }

    #[test]
    fn disclosure_picks_least_confident() {
        let llrs = [0.1, 5.0, -0.2, 3.0];
        assert_eq!(least_confident(&llrs, &[0, 1, 2, 3], 2).unwrap(), vec![0, 2]);
        assert_eq!(least_confident(&llrs, &[1, 2, 3], 2).unwrap(), vec![2, 3]);
        // ties go to the lowest index
        assert_eq!(least_confident(&[1.0, -1.0, 1.0], &[2, 1, 0], 2).unwrap(), vec![0, 1]);
        assert!(matches!(
            least_confident(&llrs, &[0], 2),
            Err(Error::SubBlockExhausted { eligible: 1, needed: 2 })
        ));
    }

    #[test]
    fn disclosure_size_per_rate() {
        let result = DecodeResult {
            converged: false,
            error_pattern: vec![0; 40],
            final_llrs: LlrVector((0..40).map(f64::from).collect()),
            iterations_used: 1,
        };
        let all: Vec<usize> = (0..40).collect();
        let d = select_disclosure(&result, CodeRate::POOL[0], &all).unwrap();
        assert_eq!(d, (0..20).collect::<Vec<_>>());
        assert_eq!(select_disclosure(&result, CodeRate::POOL[8], &all).unwrap().len(), 36);
    }
}
