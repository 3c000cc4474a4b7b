use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use qkd_reconcile::ldpc::{CodePool, DEFAULT_POOL_SEED};
use qkd_reconcile::session::BlockConfig;
use qkd_reconcile::sim::{run_experiment, ExperimentSpec};
use qkd_reconcile::verify::{FieldParams, DEFAULT_PRIME};
use qkd_reconcile::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Profile {
    /// n_fr = 4000, 8 sub-blocks.
    Ci,
    /// n_fr = 4000, 256 sub-blocks.
    Paper,
}

/// Simulate blind LDPC reconciliation with hash verification over a BSC.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Parameter preset; explicit flags override it.
    #[arg(long, value_enum, default_value = "ci")]
    profile: Profile,
    /// Frame length (multiple of 20).
    #[arg(long)]
    n_fr: Option<usize>,
    /// Sub-blocks per block.
    #[arg(long)]
    n_subblocks: Option<usize>,
    #[arg(long, default_value_t = 10)]
    blocks: usize,
    /// True channel QBER.
    #[arg(long, default_value_t = 0.02)]
    qber: f64,
    /// QBER estimate used for rate selection and decoding [default: --qber].
    #[arg(long)]
    qber_est: Option<f64>,
    /// Prime modulus of the verification hash.
    #[arg(long, default_value_t = DEFAULT_PRIME)]
    prime: u64,
    /// Directory of r<rate>.alist files; generated and saved there if absent.
    #[arg(long)]
    matrix_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    max_iter: usize,
    #[arg(long, default_value_t = 10)]
    max_extra_rounds: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Frame error rate used in the analytic leakage column.
    #[arg(long, default_value_t = 1e-5)]
    analytic_fer: f64,
    /// Report directory (blocks.jsonl, summary.csv).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load_pool(dir: Option<&PathBuf>, n_fr: usize) -> Result<CodePool, Error> {
    match dir {
        Some(d) if d.join("r0.90.alist").exists() => {
            let pool = CodePool::load_dir(d)?;
            if pool.n_fr() != n_fr {
                return Err(Error::Contract(format!(
                    "matrices in {} have n_fr = {}, expected {n_fr}",
                    d.display(),
                    pool.n_fr()
                )));
            }
            Ok(pool)
        }
        Some(d) => {
            let pool = CodePool::generate(n_fr, DEFAULT_POOL_SEED)?;
            pool.save_dir(d)?;
            Ok(pool)
        }
        None => CodePool::generate(n_fr, DEFAULT_POOL_SEED),
    }
}

fn run(args: Args) -> Result<(), Error> {
    let (n_fr, n_sub) = match args.profile {
        Profile::Ci => (4000, 8),
        Profile::Paper => (4000, 256),
    };
    let n_fr = args.n_fr.unwrap_or(n_fr);
    let mut block = BlockConfig::new(n_fr, args.n_subblocks.unwrap_or(n_sub), args.qber_est.unwrap_or(args.qber));
    block.field = FieldParams::new(args.prime)?;
    block.decoder.max_iterations = args.max_iter;
    block.max_extra_rounds = args.max_extra_rounds;
    block.session_seed = args.seed;
    let spec = ExperimentSpec {
        blocks: args.blocks,
        q_true: args.qber,
        block,
        analytic_fer: args.analytic_fer,
        out_dir: args.out,
    };
    spec.validate()?;
    let pool = load_pool(args.matrix_dir.as_ref(), n_fr)?;
    let s = run_experiment(&spec, &pool)?;
    println!(
        "blocks={} fer={:.3e} mean_leak[syndrome={:.1} disclosed={:.1} verification={:.1}] \
         eps_ver={:.3e} analytic_ver={:.2} baseline={} ratio={:.1} mismatches={}",
        s.blocks,
        s.empirical_fer,
        s.mean_syndrome_bits,
        s.mean_disclosed_bits,
        s.mean_verification_bits,
        s.eps_ver_bound,
        s.analytic_verification_bits,
        s.baseline_verification_bits,
        s.leakage_ratio,
        s.key_mismatches
    );
    println!("reports written to {}", spec.out_dir.display());
    if s.key_mismatches > 0 {
        return Err(Error::Protocol(format!("{} blocks ended with unequal verified keys", s.key_mismatches)));
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
