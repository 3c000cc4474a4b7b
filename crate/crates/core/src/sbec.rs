//! Symmetric blind error correction for one sub-block.
//!
//! Both parties build the same extended-frame layout, exchange syndromes,
//! and run the identical decoder on the relative syndrome. While decoding
//! fails, both disclose their extended-key values at the `d` least confident
//! positions, turning those positions into known (shortened) ones, and decode
//! again. The machine is message driven: [`SbecState::start`] yields the
//! syndrome to send and [`SbecState::handle`] consumes each peer message.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bits;
use crate::decoder::{bp_decode, init_llrs, select_disclosure, DecodeResult, DecoderConfig};
use crate::ldpc::ParityCheckMatrix;
use crate::rate_adapt::{build_extended_key, ExtendedKey, ExtensionPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Role {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SbecMessage {
    Syndrome(Vec<u8>),
    /// Extended-key values at the agreed disclosure positions, in position order.
    Disclose(Vec<u8>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SbecStatus {
    Corrected,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbecOutcome {
    pub status: SbecStatus,
    /// `n_sb` bits when corrected.
    pub corrected_key: Option<Vec<u8>>,
    pub disclosed_bit_count: usize,
    /// Decoding attempts, including the first.
    pub rounds_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SbecStep {
    Send(SbecMessage),
    Done(SbecOutcome),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbecParams {
    pub q_est: f64,
    pub decoder: DecoderConfig,
    /// Disclosure rounds allowed after the first decoding attempt.
    pub max_extra_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Phase {
    Ready,
    AwaitSyndrome,
    AwaitDisclosure(Vec<usize>),
    Finished,
}

#[derive(Debug, Clone)]
pub struct SbecState<'h> {
    role: Role,
    h: &'h ParityCheckMatrix,
    params: SbecParams,
    sifted: Vec<u8>,
    key: ExtendedKey,
    error_pattern: Vec<u8>,
    shortened_now: Vec<bool>,
    own_syndrome: Vec<u8>,
    delta_s: Vec<u8>,
    round: usize,
    disclosed: usize,
    phase: Phase,
}

impl<'h> SbecState<'h> {
    /// Extends `sifted` per `plan` (punctured fill from `puncture_fill_seed`,
    /// private to this party) and computes the own syndrome.
    pub fn new(
        role: Role,
        sifted: &[u8],
        plan: Arc<ExtensionPlan>,
        h: &'h ParityCheckMatrix,
        params: SbecParams,
        puncture_fill_seed: u64,
    ) -> Result<Self> {
        if plan.n_fr() != h.n_cols() {
            return Err(Error::Contract(format!(
                "plan for {} positions, code of length {}",
                plan.n_fr(),
                h.n_cols()
            )));
        }
        params.decoder.validate()?;
        let key = build_extended_key(sifted, &plan, puncture_fill_seed)?;
        let own_syndrome = h.syndrome(key.bits())?;
        let mut shortened_now = vec![false; plan.n_fr()];
        for &p in plan.shortened() {
            shortened_now[p] = true;
        }
        Ok(SbecState {
            role,
            h,
            params,
            sifted: sifted.to_vec(),
            error_pattern: vec![0; plan.n_fr()],
            key,
            shortened_now,
            own_syndrome,
            delta_s: Vec::new(),
            round: 0,
            disclosed: 0,
            phase: Phase::Ready,
        })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn plan(&self) -> &Arc<ExtensionPlan> {
        self.key.plan()
    }

    pub fn extended_key(&self) -> &ExtendedKey {
        &self.key
    }

    pub fn error_pattern(&self) -> &[u8] {
        &self.error_pattern
    }

    pub fn own_syndrome(&self) -> &[u8] {
        &self.own_syndrome
    }

    pub fn is_shortened(&self, position: usize) -> bool {
        self.shortened_now[position]
    }

    pub fn rounds(&self) -> usize {
        self.round
    }

    pub fn disclosed_bit_count(&self) -> usize {
        self.disclosed
    }

    /// Opens the exchange with this party's syndrome.
    pub fn start(&mut self) -> Result<SbecMessage> {
        if self.phase != Phase::Ready {
            return Err(Error::Protocol("sub-block already started".into()));
        }
        self.phase = Phase::AwaitSyndrome;
        Ok(SbecMessage::Syndrome(self.own_syndrome.clone()))
    }

    /// Consumes one peer message and advances the machine.
    pub fn handle(&mut self, message: SbecMessage) -> Result<SbecStep> {
        match (std::mem::replace(&mut self.phase, Phase::Finished), message) {
            (Phase::AwaitSyndrome, SbecMessage::Syndrome(peer)) => {
                if peer.len() != self.own_syndrome.len() {
                    return Err(Error::Protocol(format!(
                        "peer syndrome has {} bits, expected {}",
                        peer.len(),
                        self.own_syndrome.len()
                    )));
                }
                self.delta_s = bits::xor(&self.own_syndrome, &peer);
                self.attempt()
            }
            (Phase::AwaitDisclosure(positions), SbecMessage::Disclose(peer_bits)) => {
                let own_bits = self.key.at(&positions);
                self.apply_disclosure(&positions, &own_bits, &peer_bits)
                    .map_err(|e| Error::Protocol(e.to_string()))?;
                self.attempt()
            }
            (phase, message) => Err(Error::Protocol(format!(
                "{message:?} not expected in phase {phase:?}"
            ))),
        }
    }

    /// Records disclosed values: the error bit at each position becomes
    /// `own ⊕ peer` and the position joins the shortened set.
    pub fn apply_disclosure(&mut self, positions: &[usize], own_bits: &[u8], peer_bits: &[u8]) -> Result<()> {
        if own_bits.len() != positions.len() || peer_bits.len() != positions.len() {
            return Err(Error::Contract(format!(
                "{} positions with {} own and {} peer bits",
                positions.len(),
                own_bits.len(),
                peer_bits.len()
            )));
        }
        for &p in positions {
            match self.shortened_now.get(p) {
                None => return Err(Error::Contract(format!("position {p} beyond frame"))),
                Some(true) => return Err(Error::Contract(format!("position {p} already shortened"))),
                Some(false) => {}
            }
        }
        for ((&p, &own), &peer) in positions.iter().zip(own_bits).zip(peer_bits) {
            self.error_pattern[p] = (own ^ peer) & 1;
            self.shortened_now[p] = true;
        }
        self.disclosed += positions.len();
        Ok(())
    }

    /// Corrected key after a converged decode: Alice flips her sifted bits by
    /// `e[Ω]`, Bob keeps his sifted bits.
    pub fn finalize(&mut self, result: &DecodeResult) -> Result<SbecOutcome> {
        if !result.converged {
            return Err(Error::Contract("finalize on a non-converged decode".into()));
        }
        self.error_pattern.clone_from(&result.error_pattern);
        let corrected = match self.role {
            Role::Alice => {
                let omega = self.plan().omega();
                omega
                    .iter()
                    .map(|&p| self.key.bits()[p] ^ self.error_pattern[p])
                    .collect()
            }
            Role::Bob => self.sifted.clone(),
        };
        self.phase = Phase::Finished;
        Ok(SbecOutcome {
            status: SbecStatus::Corrected,
            corrected_key: Some(corrected),
            disclosed_bit_count: self.disclosed,
            rounds_used: self.round,
        })
    }

    fn known_error_bits(&self) -> BTreeMap<usize, u8> {
        self.shortened_now
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(p, _)| (p, self.error_pattern[p]))
            .collect()
    }

    fn fail(&mut self) -> SbecStep {
        self.phase = Phase::Finished;
        SbecStep::Done(SbecOutcome {
            status: SbecStatus::Failed,
            corrected_key: None,
            disclosed_bit_count: self.disclosed,
            rounds_used: self.round,
        })
    }

    fn attempt(&mut self) -> Result<SbecStep> {
        let priors = init_llrs(
            self.params.q_est,
            self.plan(),
            &self.known_error_bits(),
            &self.params.decoder,
        )?;
        let result = bp_decode(&self.delta_s, &priors, self.h, &self.params.decoder)?;
        self.round += 1;
        if result.converged {
            return self.finalize(&result).map(SbecStep::Done);
        }
        if self.round > self.params.max_extra_rounds {
            return Ok(self.fail());
        }
        let eligible: Vec<usize> = (0..self.shortened_now.len())
            .filter(|&p| !self.shortened_now[p])
            .collect();
        match select_disclosure(&result, self.plan().rate(), &eligible) {
            Ok(positions) => {
                let values = self.key.at(&positions);
                self.phase = Phase::AwaitDisclosure(positions);
                Ok(SbecStep::Send(SbecMessage::Disclose(values)))
            }
            Err(Error::SubBlockExhausted { .. }) => Ok(self.fail()),
            Err(e) => Err(e),
        }
    }
}
