//! Verification with an ε-universal polynomial hash over a prime field.

mod field;
mod hash;
mod protocol;

pub use field::{is_prime, FieldParams, DEFAULT_PRIME};
pub use hash::{
    collision_bound, expected_leakage, poly_hash, verification_fail_bound, HashKey, VerificationTag,
};
pub use protocol::{AliceVerifier, BobVerifier, VerifyMessage, VerifyOutcome, VerifyStep};
