//! Two-phase block verification.
//!
//! Phase 1: Alice sends a fresh key `k` and `h_k(K_A)` for the whole block;
//! Bob answers ACK if his own hash matches, NACK otherwise. Phase 2 (after
//! NACK): Alice sends one fresh key and tag per sub-block, Bob drops every
//! sub-block whose tag mismatches and returns the dropped indices, and both
//! keep the concatenation of the surviving sub-blocks.

use rand::Rng;

use super::{poly_hash, FieldParams, HashKey, VerificationTag};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerifyMessage {
    HashBlock { key: HashKey, tag: VerificationTag },
    Ack,
    Nack,
    HashSubBlocks(Vec<(HashKey, VerificationTag)>),
    BadIndices(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub verified_key: Vec<u8>,
    /// Indices of discarded sub-blocks, ascending.
    pub discarded: Vec<usize>,
    /// Tags sent over the channel: 1 on ACK, `N_sb + 1` otherwise.
    pub tags_exchanged: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyStep {
    pub send: Option<VerifyMessage>,
    pub outcome: Option<VerifyOutcome>,
}

fn check_sub_blocks(sub_blocks: &[Vec<u8>]) -> Result<()> {
    if sub_blocks.is_empty() || sub_blocks.iter().any(Vec::is_empty) {
        return Err(Error::Contract("verification needs non-empty sub-blocks".into()));
    }
    Ok(())
}

fn keep(sub_blocks: &[Vec<u8>], discarded: &[usize]) -> Vec<u8> {
    sub_blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| discarded.binary_search(i).is_err())
        .flat_map(|(_, b)| b.iter().copied())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AlicePhase {
    Ready,
    AwaitVerdict,
    AwaitBadIndices,
    Finished,
}

/// Alice's side; draws every hash key from `rng`.
pub struct AliceVerifier<R> {
    sub_blocks: Vec<Vec<u8>>,
    params: FieldParams,
    rng: R,
    phase: AlicePhase,
}

impl<R: Rng> AliceVerifier<R> {
    pub fn new(sub_blocks: Vec<Vec<u8>>, params: FieldParams, rng: R) -> Result<Self> {
        check_sub_blocks(&sub_blocks)?;
        Ok(AliceVerifier {
            sub_blocks,
            params,
            rng,
            phase: AlicePhase::Ready,
        })
    }

    pub fn start(&mut self) -> Result<VerifyMessage> {
        if self.phase != AlicePhase::Ready {
            return Err(Error::Protocol("verification already started".into()));
        }
        let key = HashKey::random(&mut self.rng, &self.params);
        let block: Vec<u8> = self.sub_blocks.concat();
        let tag = poly_hash(&block, key, &self.params)?;
        self.phase = AlicePhase::AwaitVerdict;
        Ok(VerifyMessage::HashBlock { key, tag })
    }

    pub fn handle(&mut self, message: VerifyMessage) -> Result<VerifyStep> {
        match (self.phase, message) {
            (AlicePhase::AwaitVerdict, VerifyMessage::Ack) => {
                self.phase = AlicePhase::Finished;
                Ok(VerifyStep {
                    send: None,
                    outcome: Some(VerifyOutcome {
                        verified_key: self.sub_blocks.concat(),
                        discarded: Vec::new(),
                        tags_exchanged: 1,
                    }),
                })
            }
            (AlicePhase::AwaitVerdict, VerifyMessage::Nack) => {
                let mut pairs = Vec::with_capacity(self.sub_blocks.len());
                for block in &self.sub_blocks {
                    let key = HashKey::random(&mut self.rng, &self.params);
                    pairs.push((key, poly_hash(block, key, &self.params)?));
                }
                self.phase = AlicePhase::AwaitBadIndices;
                Ok(VerifyStep {
                    send: Some(VerifyMessage::HashSubBlocks(pairs)),
                    outcome: None,
                })
            }
            (AlicePhase::AwaitBadIndices, VerifyMessage::BadIndices(mut bad)) => {
                bad.sort_unstable();
                bad.dedup();
                if bad.last().is_some_and(|&i| i >= self.sub_blocks.len()) {
                    return Err(Error::Protocol("discarded index out of range".into()));
                }
                self.phase = AlicePhase::Finished;
                Ok(VerifyStep {
                    send: None,
                    outcome: Some(VerifyOutcome {
                        verified_key: keep(&self.sub_blocks, &bad),
                        discarded: bad,
                        tags_exchanged: self.sub_blocks.len() + 1,
                    }),
                })
            }
            (phase, message) => Err(Error::Protocol(format!(
                "Alice cannot take {message:?} in phase {phase:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BobPhase {
    AwaitBlockHash,
    AwaitSubBlockHashes,
    Finished,
}

pub struct BobVerifier {
    sub_blocks: Vec<Vec<u8>>,
    params: FieldParams,
    phase: BobPhase,
}

impl BobVerifier {
    pub fn new(sub_blocks: Vec<Vec<u8>>, params: FieldParams) -> Result<Self> {
        check_sub_blocks(&sub_blocks)?;
        Ok(BobVerifier {
            sub_blocks,
            params,
            phase: BobPhase::AwaitBlockHash,
        })
    }

    pub fn handle(&mut self, message: VerifyMessage) -> Result<VerifyStep> {
        match (self.phase, message) {
            (BobPhase::AwaitBlockHash, VerifyMessage::HashBlock { key, tag }) => {
                let block = self.sub_blocks.concat();
                if poly_hash(&block, key, &self.params)? == tag {
                    self.phase = BobPhase::Finished;
                    Ok(VerifyStep {
                        send: Some(VerifyMessage::Ack),
                        outcome: Some(VerifyOutcome {
                            verified_key: block,
                            discarded: Vec::new(),
                            tags_exchanged: 1,
                        }),
                    })
                } else {
                    self.phase = BobPhase::AwaitSubBlockHashes;
                    Ok(VerifyStep {
                        send: Some(VerifyMessage::Nack),
                        outcome: None,
                    })
                }
            }
            (BobPhase::AwaitSubBlockHashes, VerifyMessage::HashSubBlocks(pairs)) => {
                if pairs.len() != self.sub_blocks.len() {
                    return Err(Error::Protocol(format!(
                        "{} sub-block hashes for {} sub-blocks",
                        pairs.len(),
                        self.sub_blocks.len()
                    )));
                }
                let mut bad = Vec::new();
                for (i, (block, &(key, tag))) in self.sub_blocks.iter().zip(&pairs).enumerate() {
                    if poly_hash(block, key, &self.params)? != tag {
                        bad.push(i);
                    }
                }
                self.phase = BobPhase::Finished;
                Ok(VerifyStep {
                    send: Some(VerifyMessage::BadIndices(bad.clone())),
                    outcome: Some(VerifyOutcome {
                        verified_key: keep(&self.sub_blocks, &bad),
                        discarded: bad,
                        tags_exchanged: self.sub_blocks.len() + 1,
                    }),
                })
            }
            (phase, message) => Err(Error::Protocol(format!(
                "Bob cannot take {message:?} in phase {phase:?}"
            ))),
        }
    }
}
