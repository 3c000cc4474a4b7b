use serde::Serialize;

/// Bits revealed on the public channel during one block.
///
/// Syndromes count `(1 − R)·n_fr` per sub-block and disclosures `d` per
/// round; verification counts `l_ht` per transmitted tag. Hash keys are
/// uniformly random and independent of the key, so they are not counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LeakageLedger {
    pub syndrome_bits: usize,
    pub disclosed_bits: usize,
    pub verification_hash_bits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageEvent {
    Syndrome { bits: usize },
    Disclosure { bits: usize },
    Hash { bits: usize },
}

impl LeakageLedger {
    pub fn record(&mut self, event: LeakageEvent) {
        match event {
            LeakageEvent::Syndrome { bits } => self.syndrome_bits += bits,
            LeakageEvent::Disclosure { bits } => self.disclosed_bits += bits,
            LeakageEvent::Hash { bits } => self.verification_hash_bits += bits,
        }
    }

    pub fn merge(&mut self, other: &LeakageLedger) {
        self.syndrome_bits += other.syndrome_bits;
        self.disclosed_bits += other.disclosed_bits;
        self.verification_hash_bits += other.verification_hash_bits;
    }

    pub fn total(&self) -> usize {
        self.syndrome_bits + self.disclosed_bits + self.verification_hash_bits
    }
}
