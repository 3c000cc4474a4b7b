use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{decode_message, encode_message, LeakageEvent, LeakageLedger, ProtocolMessage};
use crate::decoder::DecoderConfig;
use crate::ldpc::{CodePool, CodeRate, ParityCheckMatrix};
use crate::rate_adapt::{select_rate, sub_block_len, ExtensionPlan, RateChoice};
use crate::sbec::{Role, SbecMessage, SbecOutcome, SbecParams, SbecState, SbecStatus, SbecStep};
use crate::verify::{AliceVerifier, BobVerifier, FieldParams, VerifyMessage, VerifyOutcome};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockConfig {
    pub n_fr: usize,
    pub n_sub_blocks: usize,
    pub q_est: f64,
    pub field: FieldParams,
    pub decoder: DecoderConfig,
    pub max_extra_rounds: usize,
    pub session_seed: u64,
}

impl BlockConfig {
    /// Defaults: `p = 2^50 − 27`, 60 BP iterations, 10 extra rounds.
    pub fn new(n_fr: usize, n_sub_blocks: usize, q_est: f64) -> Self {
        BlockConfig {
            n_fr,
            n_sub_blocks,
            q_est,
            field: FieldParams::default(),
            decoder: DecoderConfig::default(),
            max_extra_rounds: 10,
            session_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fr == 0 || !self.n_fr.is_multiple_of(20) {
            return Err(Error::Contract(format!("frame length {} not a multiple of 20", self.n_fr)));
        }
        if self.n_sub_blocks == 0 || self.n_sub_blocks > 0xFFFF {
            return Err(Error::Contract(format!("{} sub-blocks", self.n_sub_blocks)));
        }
        if !(self.q_est > 0.0 && self.q_est < 0.5) {
            return Err(Error::Domain(format!("q_est {} outside (0, 0.5)", self.q_est)));
        }
        self.decoder.validate()
    }

    /// Sifted bits per sub-block, `n_sb`.
    pub fn n_sb(&self) -> usize {
        sub_block_len(self.n_fr)
    }

    /// Sifted bits per block, `n_b = N_sb · n_sb`.
    pub fn n_b(&self) -> usize {
        self.n_sub_blocks * self.n_sb()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubBlockFate {
    Verified,
    FailedSbec,
    Discarded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerificationBranch {
    /// Whole-block hashes matched.
    Ack,
    /// Per-sub-block fallback ran.
    Nack,
    /// Every sub-block failed SBEC; nothing left to verify.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockReport {
    pub rate: CodeRate,
    pub n_shortened: usize,
    pub n_punctured: usize,
    pub verified_key_length: usize,
    pub sbec_failed: usize,
    pub verification_discarded: usize,
    /// Sub-blocks that entered verification.
    pub effective_sub_blocks: usize,
    pub verification_branch: VerificationBranch,
    pub ledger: LeakageLedger,
    /// Decoding attempts per sub-block.
    pub rounds: Vec<usize>,
    pub fates: Vec<SubBlockFate>,
}

/// Every frame exchanged in a block, in a fixed order: sub-block by
/// sub-block (Alice's frame before Bob's in each exchange), then verification.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    frames: Vec<(Role, Vec<u8>)>,
}

impl Transcript {
    pub fn frames(&self) -> &[(Role, Vec<u8>)] {
        &self.frames
    }

    fn push(&mut self, from: Role, frame: Vec<u8>) {
        self.frames.push((from, frame));
    }

    /// Flat serialization: `[0 = Alice | 1 = Bob][u32 BE length][frame]` per frame.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for (from, frame) in &self.frames {
            out.push(u8::from(*from == Role::Bob));
            out.extend_from_slice(&(frame.len() as u32).to_be_bytes());
            out.extend_from_slice(frame);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BlockRun {
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
    pub report: BlockReport,
    pub transcript: Transcript,
}

struct SubBlockRun {
    alice: SbecOutcome,
    bob: SbecOutcome,
    ledger: LeakageLedger,
    transcript: Transcript,
}

/// Sends a message through the wire codec, as a socket transport would.
fn carry(transcript: &mut Transcript, from: Role, msg: ProtocolMessage) -> Result<ProtocolMessage> {
    let frame = encode_message(&msg);
    let received = decode_message(&frame)?;
    transcript.push(from, frame);
    Ok(received)
}

fn aborted(state: &SbecState) -> SbecOutcome {
    SbecOutcome {
        status: SbecStatus::Failed,
        corrected_key: None,
        disclosed_bit_count: state.disclosed_bit_count(),
        rounds_used: state.rounds(),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_sub_block(
    index: usize,
    alice_sifted: &[u8],
    bob_sifted: &[u8],
    h: &ParityCheckMatrix,
    choice: RateChoice,
    params: SbecParams,
    session_seed: u64,
) -> Result<SubBlockRun> {
    let sb_seed = seed::derive(session_seed, seed::SUB_BLOCK + index as u64);
    let plan = Arc::new(ExtensionPlan::build(h, choice, sb_seed)?);
    let mut alice = SbecState::new(
        Role::Alice,
        alice_sifted,
        Arc::clone(&plan),
        h,
        params,
        seed::derive(sb_seed, seed::ALICE_PUNCTURE_FILL),
    )?;
    let mut bob = SbecState::new(
        Role::Bob,
        bob_sifted,
        plan,
        h,
        params,
        seed::derive(sb_seed, seed::BOB_PUNCTURE_FILL),
    )?;
    let id = u16::try_from(index).map_err(|_| Error::Contract(format!("sub-block index {index}")))?;
    let mut transcript = Transcript::default();
    let mut ledger = LeakageLedger::default();
    ledger.record(LeakageEvent::Syndrome { bits: h.n_rows() });

    let mut to_bob = alice.start()?;
    let mut to_alice = bob.start()?;
    loop {
        let (_, msg_a) = carry(&mut transcript, Role::Alice, ProtocolMessage::from_sbec(id, &to_bob))?.into_sbec()?;
        let (_, msg_b) = carry(&mut transcript, Role::Bob, ProtocolMessage::from_sbec(id, &to_alice))?.into_sbec()?;
        if let SbecMessage::Disclose(values) = &msg_a {
            ledger.record(LeakageEvent::Disclosure { bits: values.len() });
        }
        let step_a = alice.handle(msg_b);
        let step_b = bob.handle(msg_a);
        match (step_a, step_b) {
            (Ok(SbecStep::Send(a)), Ok(SbecStep::Send(b))) => {
                to_bob = a;
                to_alice = b;
            }
            (Ok(SbecStep::Done(a)), Ok(SbecStep::Done(b))) => {
                if a.status != b.status || a.rounds_used != b.rounds_used {
                    return Err(Error::Protocol(format!("sub-block {index}: parties disagree on outcome")));
                }
                return Ok(SubBlockRun { alice: a, bob: b, ledger, transcript });
            }
            (Err(Error::Protocol(_)), _) | (_, Err(Error::Protocol(_))) => {
                return Ok(SubBlockRun {
                    alice: aborted(&alice),
                    bob: aborted(&bob),
                    ledger,
                    transcript,
                });
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
            _ => return Err(Error::Protocol(format!("sub-block {index}: parties out of step"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationRun {
    pub alice: VerifyOutcome,
    pub bob: VerifyOutcome,
}

/// The verification exchange over already-corrected sub-blocks.
///
/// Records one hash event per transmitted tag and appends every frame to
/// `transcript`. Alice's hash keys come from `rng_seed`.
pub fn run_verification(
    alice_blocks: Vec<Vec<u8>>,
    bob_blocks: Vec<Vec<u8>>,
    field: FieldParams,
    rng_seed: u64,
    ledger: &mut LeakageLedger,
    transcript: &mut Transcript,
) -> Result<VerificationRun> {
    if alice_blocks.len() != bob_blocks.len() {
        return Err(Error::Contract("parties hold different sub-block counts".into()));
    }
    let mut alice = AliceVerifier::new(alice_blocks, field, seed::rng(rng_seed))?;
    let mut bob = BobVerifier::new(bob_blocks, field)?;
    let l_ht = field.tag_bits();
    let count_tags = |msg: &VerifyMessage, ledger: &mut LeakageLedger| match msg {
        VerifyMessage::HashBlock { .. } => ledger.record(LeakageEvent::Hash { bits: l_ht }),
        VerifyMessage::HashSubBlocks(pairs) => ledger.record(LeakageEvent::Hash { bits: pairs.len() * l_ht }),
        _ => {}
    };

    let mut to_bob = alice.start()?;
    let mut bob_outcome = None;
    loop {
        count_tags(&to_bob, ledger);
        let received = carry(transcript, Role::Alice, ProtocolMessage::from_verify(&to_bob, &field)?)?
            .into_verify(&field)?;
        let step = bob.handle(received)?;
        if let Some(o) = step.outcome {
            bob_outcome = Some(o);
        }
        let reply = step
            .send
            .ok_or_else(|| Error::Protocol("Bob produced no reply".into()))?;
        let received = carry(transcript, Role::Bob, ProtocolMessage::from_verify(&reply, &field)?)?
            .into_verify(&field)?;
        let step = alice.handle(received)?;
        match (step.outcome, step.send) {
            (Some(alice_outcome), None) => {
                let bob = bob_outcome.ok_or_else(|| Error::Protocol("Alice finished before Bob".into()))?;
                return Ok(VerificationRun { alice: alice_outcome, bob });
            }
            (None, Some(next)) => to_bob = next,
            _ => return Err(Error::Protocol("unexpected verification step".into())),
        }
    }
}

/// Reconciles one block of `N_sb · n_sb` sifted bits per party.
///
/// Sub-blocks run SBEC concurrently; ones that fail there are dropped by
/// both parties before verification, which then runs on the survivors.
pub fn run_block(alice_sifted: &[u8], bob_sifted: &[u8], config: &BlockConfig, pool: &CodePool) -> Result<BlockRun> {
    config.validate()?;
    if pool.n_fr() != config.n_fr {
        return Err(Error::Contract(format!(
            "pool frame length {} differs from configured {}",
            pool.n_fr(),
            config.n_fr
        )));
    }
    let n_b = config.n_b();
    if alice_sifted.len() != n_b || bob_sifted.len() != n_b {
        return Err(Error::Contract(format!(
            "block inputs of {} and {} bits, expected {n_b}",
            alice_sifted.len(),
            bob_sifted.len()
        )));
    }
    let rates: Vec<CodeRate> = pool.rates().collect();
    let choice = select_rate(config.q_est, config.n_fr, &rates)?;
    let h = pool.code(choice.rate)?;
    let params = SbecParams {
        q_est: config.q_est,
        decoder: config.decoder,
        max_extra_rounds: config.max_extra_rounds,
    };
    let n_sb = config.n_sb();

    let runs = alice_sifted
        .par_chunks(n_sb)
        .zip(bob_sifted.par_chunks(n_sb))
        .enumerate()
        .map(|(i, (a, b))| run_sub_block(i, a, b, h, choice, params, config.session_seed))
        .collect::<Result<Vec<_>>>()?;

    let mut ledger = LeakageLedger::default();
    let mut transcript = Transcript::default();
    let mut survivors = Vec::new();
    let mut alice_blocks = Vec::new();
    let mut bob_blocks = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        ledger.merge(&run.ledger);
        transcript.frames.extend(run.transcript.frames.iter().cloned());
        if let (Some(a), Some(b)) = (&run.alice.corrected_key, &run.bob.corrected_key) {
            survivors.push(i);
            alice_blocks.push(a.clone());
            bob_blocks.push(b.clone());
        }
    }

    let mut fates: Vec<SubBlockFate> = vec![SubBlockFate::FailedSbec; config.n_sub_blocks];
    let (alice_key, bob_key, branch, discarded) = if survivors.is_empty() {
        (Vec::new(), Vec::new(), VerificationBranch::Skipped, Vec::new())
    } else {
        let v = run_verification(
            alice_blocks,
            bob_blocks,
            config.field,
            seed::derive(config.session_seed, seed::ALICE_HASH_KEYS),
            &mut ledger,
            &mut transcript,
        )?;
        if v.alice.discarded != v.bob.discarded {
            return Err(Error::Protocol("parties disagree on discarded sub-blocks".into()));
        }
        let branch = if v.alice.tags_exchanged == 1 {
            VerificationBranch::Ack
        } else {
            VerificationBranch::Nack
        };
        (v.alice.verified_key, v.bob.verified_key, branch, v.alice.discarded)
    };
    for (k, &i) in survivors.iter().enumerate() {
        fates[i] = if discarded.binary_search(&k).is_ok() {
            SubBlockFate::Discarded
        } else {
            SubBlockFate::Verified
        };
    }

    let report = BlockReport {
        rate: choice.rate,
        n_shortened: choice.n_shortened,
        n_punctured: choice.n_punctured,
        verified_key_length: alice_key.len(),
        sbec_failed: config.n_sub_blocks - survivors.len(),
        verification_discarded: discarded.len(),
        effective_sub_blocks: survivors.len(),
        verification_branch: branch,
        ledger,
        rounds: runs.iter().map(|r| r.alice.rounds_used).collect(),
        fates,
    };
    Ok(BlockRun {
        alice_key,
        bob_key,
        report,
        transcript,
    })
}
