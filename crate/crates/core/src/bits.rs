//! Bit strings are plain `u8` slices holding 0 or 1 per element.

use crate::{Error, Result};

pub fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn weight(bits: &[u8]) -> usize {
    bits.iter().filter(|&&b| b != 0).count()
}

pub fn is_binary(bits: &[u8]) -> bool {
    bits.iter().all(|&b| b <= 1)
}

/// Packs MSB-first, zero-padding the final octet.
pub fn pack(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b != 0 {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

/// Inverse of [`pack`]. Fails if `octets` is too short or carries nonzero padding.
pub fn unpack(octets: &[u8], n_bits: usize) -> Result<Vec<u8>> {
    if octets.len() != n_bits.div_ceil(8) {
        return Err(Error::Wire(format!(
            "{} octets cannot carry exactly {n_bits} bits",
            octets.len()
        )));
    }
    let bits: Vec<u8> = (0..n_bits)
        .map(|i| (octets[i / 8] >> (7 - i % 8)) & 1)
        .collect();
    if !n_bits.is_multiple_of(8) {
        let pad_mask = 0xffu8 >> (n_bits % 8);
        if octets[octets.len() - 1] & pad_mask != 0 {
            return Err(Error::Wire("nonzero padding bits".into()));
        }
    }
    Ok(bits)
}

/// Big-endian bits to integer. `bits.len()` must be at most 64.
pub fn to_u64(bits: &[u8]) -> u64 {
    debug_assert!(bits.len() <= 64);
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}

/// Integer to a `width`-bit big-endian string.
pub fn from_u64(value: u64, width: usize) -> Vec<u8> {
    debug_assert!(width == 64 || value >> width == 0);
    (0..width)
        .rev()
        .map(|i| if i >= 64 { 0 } else { ((value >> i) & 1) as u8 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pack_is_msb_first() {
        assert_eq!(pack(&[1, 0, 0, 0, 0, 0, 0, 1, 1]), vec![0x81, 0x80]);
        assert_eq!(pack(&[]), Vec::<u8>::new());
    }

    #[test]
    fn unpack_rejects_dirty_padding() {
        assert!(unpack(&[0x81, 0x81], 9).is_err());
        assert!(unpack(&[0x81], 9).is_err());
    }

    #[test]
    fn integer_conversion() {
        assert_eq!(to_u64(&[0, 0, 0, 0, 0, 1, 1]), 3);
        assert_eq!(from_u64(5, 7), vec![0, 0, 0, 0, 1, 0, 1]);
    }

    proptest! {
        #[test]
        fn pack_roundtrip(bits in proptest::collection::vec(0u8..2, 0..100)) {
            prop_assert_eq!(unpack(&pack(&bits), bits.len()).unwrap(), bits);
        }

        #[test]
        fn int_roundtrip(v in any::<u64>(), extra in 0usize..8) {
            let width = 64 - v.leading_zeros() as usize + extra;
            prop_assert_eq!(to_u64(&from_u64(v, width.min(64))), v);
        }
    }
}
