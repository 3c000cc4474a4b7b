//! BSC key generation and the multi-block experiment runner.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;

use crate::ldpc::CodePool;
use crate::session::{run_block, BlockConfig, BlockReport};
use crate::verify::{expected_leakage, verification_fail_bound};
use crate::{seed, Error, Result};

/// A uniform key for Alice and Bob's copy through a BSC with flip probability `q`.
pub fn gen_sifted_pair(n: usize, q: f64, seed: u64) -> Result<(Vec<u8>, Vec<u8>)> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("channel flip probability {q}")));
    }
    let mut rng = seed::rng(seed);
    let mut alice = Vec::with_capacity(n);
    let mut bob = Vec::with_capacity(n);
    for _ in 0..n {
        let a: u8 = rng.random_range(0..2);
        let e = u8::from(rng.random_bool(q));
        alice.push(a);
        bob.push(a ^ e);
    }
    Ok((alice, bob))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub blocks: usize,
    pub q_true: f64,
    /// `q_est`, the QBER estimate, lives in `block`.
    pub block: BlockConfig,
    /// Frame error rate fed to the analytic leakage column.
    pub analytic_fer: f64,
    /// Output directory for `blocks.jsonl` and `summary.csv`.
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.blocks == 0 {
            return Err(Error::Contract("experiment needs at least one block".into()));
        }
        if !(0.0..0.5).contains(&self.q_true) {
            return Err(Error::Domain(format!("q_true {} outside [0, 0.5)", self.q_true)));
        }
        if !(0.0..=1.0).contains(&self.analytic_fer) {
            return Err(Error::Domain(format!("analytic FER {}", self.analytic_fer)));
        }
        self.block.validate()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockRecord {
    pub block: usize,
    pub seed: u64,
    /// Channel errors planted between the two sifted keys.
    pub channel_errors: usize,
    /// Verified keys differ.
    pub key_mismatch: bool,
    #[serde(flatten)]
    pub report: BlockReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub blocks: usize,
    pub n_fr: usize,
    pub n_sub_blocks: usize,
    pub q_true: f64,
    pub q_est: f64,
    pub tag_bits: usize,
    pub sub_blocks_total: usize,
    pub sbec_failed: usize,
    pub verification_discarded: usize,
    pub empirical_fer: f64,
    pub mean_syndrome_bits: f64,
    pub mean_disclosed_bits: f64,
    pub mean_verification_bits: f64,
    pub mean_verified_key_length: f64,
    pub mean_rounds: f64,
    pub ack_blocks: usize,
    pub eps_ver_bound: f64,
    pub analytic_fer: f64,
    pub analytic_verification_bits: f64,
    pub analytic_verification_bits_empirical_fer: f64,
    pub baseline_verification_bits: usize,
    pub leakage_ratio: f64,
    pub key_mismatches: usize,
}

pub struct ExperimentResult {
    pub records: Vec<BlockRecord>,
    pub summary: Summary,
}

/// Per-block seed: experiment seed → block index.
pub fn block_seed(experiment_seed: u64, block: usize) -> u64 {
    seed::derive(experiment_seed, seed::BLOCK + block as u64)
}

/// Runs every block in memory. The experiment seed is `spec.block.session_seed`.
pub fn simulate(spec: &ExperimentSpec, pool: &CodePool) -> Result<ExperimentResult> {
    spec.validate()?;
    let n_b = spec.block.n_b();
    let mut records = Vec::with_capacity(spec.blocks);
    for b in 0..spec.blocks {
        let bs = block_seed(spec.block.session_seed, b);
        let (alice, bob) = gen_sifted_pair(n_b, spec.q_true, seed::derive(bs, seed::CHANNEL))?;
        let channel_errors = alice.iter().zip(&bob).filter(|(a, b)| a != b).count();
        let config = BlockConfig {
            session_seed: seed::derive(bs, seed::SESSION),
            ..spec.block
        };
        let run = run_block(&alice, &bob, &config, pool)?;
        records.push(BlockRecord {
            block: b,
            seed: bs,
            channel_errors,
            key_mismatch: run.alice_key != run.bob_key,
            report: run.report,
        });
    }
    let summary = summarize(spec, &records)?;
    Ok(ExperimentResult { records, summary })
}

fn summarize(spec: &ExperimentSpec, records: &[BlockRecord]) -> Result<Summary> {
    let cfg = &spec.block;
    let blocks = records.len() as f64;
    let mean = |f: &dyn Fn(&BlockRecord) -> f64| records.iter().map(f).sum::<f64>() / blocks;
    let sub_blocks_total = records.len() * cfg.n_sub_blocks;
    let sbec_failed: usize = records.iter().map(|r| r.report.sbec_failed).sum();
    let verification_discarded: usize = records.iter().map(|r| r.report.verification_discarded).sum();
    let empirical_fer = (sbec_failed + verification_discarded) as f64 / sub_blocks_total as f64;
    let l_ht = cfg.field.tag_bits();
    let analytic = expected_leakage(spec.analytic_fer, cfg.n_sub_blocks, l_ht)?;
    let baseline = cfg.n_sub_blocks * l_ht;
    Ok(Summary {
        blocks: records.len(),
        n_fr: cfg.n_fr,
        n_sub_blocks: cfg.n_sub_blocks,
        q_true: spec.q_true,
        q_est: cfg.q_est,
        tag_bits: l_ht,
        sub_blocks_total,
        sbec_failed,
        verification_discarded,
        empirical_fer,
        mean_syndrome_bits: mean(&|r| r.report.ledger.syndrome_bits as f64),
        mean_disclosed_bits: mean(&|r| r.report.ledger.disclosed_bits as f64),
        mean_verification_bits: mean(&|r| r.report.ledger.verification_hash_bits as f64),
        mean_verified_key_length: mean(&|r| r.report.verified_key_length as f64),
        mean_rounds: mean(&|r| {
            r.report.rounds.iter().sum::<usize>() as f64 / r.report.rounds.len() as f64
        }),
        ack_blocks: records
            .iter()
            .filter(|r| r.report.verification_branch == crate::session::VerificationBranch::Ack)
            .count(),
        eps_ver_bound: verification_fail_bound(cfg.n_b(), cfg.n_sb(), cfg.n_sub_blocks, &cfg.field)?,
        analytic_fer: spec.analytic_fer,
        analytic_verification_bits: analytic,
        analytic_verification_bits_empirical_fer: expected_leakage(empirical_fer, cfg.n_sub_blocks, l_ht)?,
        baseline_verification_bits: baseline,
        leakage_ratio: baseline as f64 / analytic,
        key_mismatches: records.iter().filter(|r| r.key_mismatch).count(),
    })
}

/// Writes `blocks.jsonl` (one object per block) and `summary.csv`
/// (`metric,value` rows) under `dir`.
pub fn write_reports(dir: &Path, result: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let jsonl = dir.join("blocks.jsonl");
    let file = File::create(&jsonl).map_err(|e| Error::io(&jsonl, e))?;
    let mut out = BufWriter::new(file);
    for r in &result.records {
        let line = serde_json::to_string(r).map_err(|e| Error::Wire(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io(&jsonl, e))?;
    }
    out.flush().map_err(|e| Error::io(&jsonl, e))?;

    let csv_path = dir.join("summary.csv");
    let csv_err = |e: csv::Error| Error::Io {
        path: csv_path.clone(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(["metric", "value"]).map_err(csv_err)?;
    let fields = serde_json::to_value(&result.summary).map_err(|e| Error::Wire(e.to_string()))?;
    if let serde_json::Value::Object(map) = fields {
        for (k, v) in summary_order(&map) {
            w.write_record([k, &v.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    Ok(())
}

// serde_json maps are sorted by key; keep declaration order instead.
fn summary_order(map: &serde_json::Map<String, serde_json::Value>) -> Vec<(&str, serde_json::Value)> {
    const ORDER: &[&str] = &[
        "blocks",
        "n_fr",
        "n_sub_blocks",
        "q_true",
        "q_est",
        "tag_bits",
        "sub_blocks_total",
        "sbec_failed",
        "verification_discarded",
        "empirical_fer",
        "mean_syndrome_bits",
        "mean_disclosed_bits",
        "mean_verification_bits",
        "mean_verified_key_length",
        "mean_rounds",
        "ack_blocks",
        "eps_ver_bound",
        "analytic_fer",
        "analytic_verification_bits",
        "analytic_verification_bits_empirical_fer",
        "baseline_verification_bits",
        "leakage_ratio",
        "key_mismatches",
    ];
    ORDER
        .iter()
        .filter_map(|k| map.get(*k).map(|v| (*k, v.clone())))
        .collect()
}

/// [`simulate`] followed by [`write_reports`] into `spec.out_dir`.
pub fn run_experiment(spec: &ExperimentSpec, pool: &CodePool) -> Result<Summary> {
    let result = simulate(spec, pool)?;
    write_reports(&spec.out_dir, &result)?;
    Ok(result.summary)
}
