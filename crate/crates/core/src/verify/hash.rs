use super::FieldParams;
use crate::{bits, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashKey(u64);

impl HashKey {
    pub fn new(k: u64, params: &FieldParams) -> Result<Self> {
        if k >= params.p() {
            return Err(Error::Domain(format!("hash key {k} not below p = {}", params.p())));
        }
        Ok(HashKey(k))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn random(rng: &mut impl rand::Rng, params: &FieldParams) -> Self {
        HashKey(rng.random_range(0..params.p()))
    }

    pub fn to_bits(self, params: &FieldParams) -> Vec<u8> {
        bits::from_u64(self.0, params.tag_bits())
    }

    pub fn from_bits(b: &[u8], params: &FieldParams) -> Result<Self> {
        check_width(b, params)?;
        Self::new(bits::to_u64(b), params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VerificationTag(u64);

impl VerificationTag {
    pub fn new(v: u64, params: &FieldParams) -> Result<Self> {
        if v >= params.p() {
            return Err(Error::Domain(format!("tag {v} not below p = {}", params.p())));
        }
        Ok(VerificationTag(v))
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// `l_ht`-bit big-endian encoding.
    pub fn to_bits(self, params: &FieldParams) -> Vec<u8> {
        bits::from_u64(self.0, params.tag_bits())
    }

    pub fn from_bits(b: &[u8], params: &FieldParams) -> Result<Self> {
        check_width(b, params)?;
        Self::new(bits::to_u64(b), params)
    }
}

fn check_width(b: &[u8], params: &FieldParams) -> Result<()> {
    if b.len() != params.tag_bits() {
        return Err(Error::Wire(format!(
            "field element of {} bits, expected {}",
            b.len(),
            params.tag_bits()
        )));
    }
    Ok(())
}

/// `Σ int(x_i)·k^(i−1) mod p` over the `l_p`-bit chunks `x_1 … x_n` of `x`.
///
/// Chunks are read big-endian; a short last chunk is zero-padded on the right.
pub fn poly_hash(x: &[u8], key: HashKey, params: &FieldParams) -> Result<VerificationTag> {
    if x.is_empty() {
        return Err(Error::Contract("cannot hash an empty string".into()));
    }
    let l_p = params.chunk_bits();
    let tag = x.chunks(l_p).rev().fold(0u64, |acc, chunk| {
        let value = bits::to_u64(chunk) << (l_p - chunk.len());
        params.add(params.mul(acc, key.0), value % params.p())
    });
    Ok(VerificationTag(tag))
}

/// `(⌈l / l_p⌉ − 1) / p`.
pub fn collision_bound(l: usize, params: &FieldParams) -> f64 {
    let chunks = l.div_ceil(params.chunk_bits());
    chunks.saturating_sub(1) as f64 / params.p() as f64
}

/// Upper bound on accepting some erroneous sub-block when all `n_sub` of
/// them are wrong: `ε(n_b) + (1 − ε(n_b))·(1 − (1 − ε(n_sb))^N_sb)`.
pub fn verification_fail_bound(n_b: usize, n_sb: usize, n_sub: usize, params: &FieldParams) -> Result<f64> {
    if n_sub == 0 || n_b != n_sub * n_sb {
        return Err(Error::Contract(format!(
            "block of {n_b} bits is not {n_sub} sub-blocks of {n_sb}"
        )));
    }
    let eps_block = collision_bound(n_b, params);
    let eps_sub = collision_bound(n_sb, params);
    // 1 − (1 − ε)^N without cancellation for tiny ε
    let any_sub = -(n_sub as f64 * (-eps_sub).ln_1p()).exp_m1();
    Ok(eps_block + (1.0 - eps_block) * any_sub)
}

/// Expected verification leakage in bits when each sub-block independently
/// still holds an error with probability `fer`.
pub fn expected_leakage(fer: f64, n_sub: usize, tag_bits: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&fer) {
        return Err(Error::Domain(format!("frame error rate {fer}")));
    }
    let all_clean = (1.0 - fer).powi(i32::try_from(n_sub).map_err(|_| Error::Domain("too many sub-blocks".into()))?);
    let l = tag_bits as f64;
    Ok(all_clean * l + (1.0 - all_clean) * (n_sub as f64 + 1.0) * l)
}
