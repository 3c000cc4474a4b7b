//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use qkd_reconcile::decoder::{bp_decode, DecoderConfig, LlrVector};
use qkd_reconcile::ldpc::{peg_generate, CodePool, CodeRate, DegreeDistribution, ParityCheckMatrix};
use qkd_reconcile::rate_adapt::select_rate;
use qkd_reconcile::session::{run_block, run_verification, BlockConfig, LeakageLedger, SubBlockFate, Transcript};
use qkd_reconcile::sim::{block_seed, gen_sifted_pair};
use qkd_reconcile::verify::{
    expected_leakage, poly_hash, verification_fail_bound, FieldParams, HashKey, DEFAULT_PRIME,
};
use qkd_reconcile::{seed, Result};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
/// Transcript bytes, JSON report, Alice's key, Bob's key.
type BlockTrace = (Vec<u8>, String, Vec<u8>, Vec<u8>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn ensure(ok: bool, detail: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail())
    }
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Binary entropy, evaluated with natural logs.
fn entropy(q: f64) -> f64 {
    let t = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    (t(q) + t(1.0 - q)) / std::f64::consts::LN_2
}

// Expected verification leakage, as a sum over the number of erroneous
// sub-blocks: zero errors cost one tag, anything else N+1 tags.
fn leakage_oracle(fer: f64, n: u32, l_ht: f64) -> f64 {
    let mut p_zero = 1.0;
    for _ in 0..n {
        p_zero *= 1.0 - fer;
    }
    p_zero * l_ht + (1.0 - p_zero) * f64::from(n + 1) * l_ht
}

fn c1_leakage() -> Outcome {
    let got = lib(expected_leakage(1e-5, 256, 50))?;
    let oracle = leakage_oracle(1e-5, 256, 50.0);
    ensure((got - oracle).abs() < 1e-9, || format!("{got} vs oracle {oracle}"))?;
    check(
        (82.5..=83.0).contains(&got),
        format!("expected leakage {got:.3} bits = {:.3}·l_ht, window [82.5, 83.0]", got / 50.0),
    )
}

fn c2_baseline() -> Outcome {
    let field = FieldParams::default();
    let baseline = 256 * field.tag_bits();
    let ratio = baseline as f64 / lib(expected_leakage(1e-5, 256, field.tag_bits()))?;
    check(
        baseline == 12_800 && (154.0..=156.0).contains(&ratio),
        format!("baseline {baseline} bits, ratio {ratio:.2}, window [154, 156]"),
    )
}

fn c3_fail_bound() -> Outcome {
    let field = FieldParams::default();
    let got = lib(verification_fail_bound(256 * 3800, 3800, 256, &field))?;
    // ε(l) = (⌈l/49⌉ − 1)/p, then 1 − (1 − ε)^N by the binomial series
    let p = DEFAULT_PRIME as f64;
    let eps_block = (972_800f64 / 49.0).ceil() - 1.0;
    let eps_sub = (3800f64 / 49.0).ceil() - 1.0;
    let (eps_block, eps_sub) = (eps_block / p, eps_sub / p);
    let mut any = 0.0;
    let mut term = 1.0;
    for k in 1..=256u32 {
        term *= -eps_sub * f64::from(257 - k) / f64::from(k);
        any -= term;
    }
    let oracle = eps_block + (1.0 - eps_block) * any;
    ensure((got - oracle).abs() <= 1e-6 * oracle, || format!("{got:e} vs oracle {oracle:e}"))?;
    check(
        got <= 5e-11,
        format!("eps_ver = {got:.4e} by direct evaluation (the often quoted 2e-11 is not reproduced), limit 5e-11"),
    )
}

fn c4_disclosure_table() -> Outcome {
    let got: Vec<usize> = CodeRate::POOL.iter().map(|r| r.disclosure_size()).collect();
    // ⌈56 − 40R⌉ with R = t/20, in integers: ⌈(1120 − 40t)/20⌉
    let oracle: Vec<usize> = CodeRate::POOL
        .iter()
        .map(|r| (1120 - 40 * usize::from(r.twentieths())).div_ceil(20))
        .collect();
    check(
        got == oracle && got == [20, 22, 24, 26, 28, 30, 32, 34, 36],
        format!("d = {got:?} for R = 0.90 … 0.50"),
    )
}

fn c5_rate_oracle() -> Outcome {
    let n_fr = 4000i64;
    let n_sb = 3800i64;
    let ext = 200i64;
    let mut checked = 0;
    for step in 0..=21 {
        let q = 0.01 + 0.005 * f64::from(step);
        // every pool rate, as twentieths t: R = t/20, n_sb·(1 − R) = 190·(20 − t)
        let candidates: Vec<(i64, i64)> = (10..=18i64)
            .map(|t| (t, (entropy(q) * n_fr as f64 - (n_sb * (20 - t) / 20) as f64).ceil() as i64))
            .collect();
        let feasible = candidates.iter().filter(|(_, s)| (0..=ext).contains(s)).max_by_key(|(t, _)| *t);
        let expected = match feasible {
            Some(&(t, s)) => (t, s, ext - s),
            None if candidates.iter().all(|(_, s)| *s < 0) => (18, 0, ext),
            None => return Err(format!("oracle found no rate at q = {q}")),
        };
        let got = lib(select_rate(q, n_fr as usize, &CodeRate::POOL))?;
        let got = (
            i64::from(got.rate.twentieths()),
            got.n_shortened as i64,
            got.n_punctured as i64,
        );
        ensure(got == expected, || format!("q = {q}: {got:?} vs oracle {expected:?}"))?;
        ensure(got.1 >= 0 && got.2 >= 0 && got.1 + got.2 == ext, || format!("q = {q}: {got:?}"))?;
        checked += 1;
    }
    Ok(format!("{checked} grid points agree with brute force over 9 rates"))
}

/// All minimal-weight error patterns with the given syndrome (as bit masks).
fn coset_leaders(rows: &[u32], n: usize, syndrome: u32) -> Vec<u32> {
    let mut best = u32::MAX;
    let mut leaders = Vec::new();
    for e in 0u32..(1 << n) {
        let s = rows
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, r)| acc | (((r & e).count_ones() & 1) << j));
        if s != syndrome {
            continue;
        }
        let w = e.count_ones();
        if w < best {
            best = w;
            leaders.clear();
        }
        if w == best {
            leaders.push(e);
        }
    }
    leaders
}

fn c6_decoder_oracle() -> Outcome {
    let mut rng = seed::rng(0xdec0de);
    let cfg = DecoderConfig::default();
    let llr = (0.95f64 / 0.05).ln();
    let (mut converged, mut syndrome_ok, mut unique, mut agree) = (0, 0, 0, 0);
    for i in 0..200u64 {
        let n = if i % 2 == 0 { 12 } else { 16 };
        let m = 3 * n / 4;
        let h: ParityCheckMatrix = lib(peg_generate(n, m, &lib(DegreeDistribution::regular(3))?, rng.random()))?;
        let rows: Vec<u32> = h.rows().iter().map(|r| r.iter().fold(0, |acc, &c| acc | 1 << c)).collect();
        let weight = rng.random_range(1..=2);
        let mut positions: Vec<usize> = (0..n).collect();
        positions.shuffle(&mut rng);
        let mut e = vec![0u8; n];
        for &p in &positions[..weight] {
            e[p] = 1;
        }
        let delta_s = lib(h.syndrome(&e))?;
        let priors = lib(LlrVector::new(vec![llr; n], cfg.llr_clamp))?;
        let result = lib(bp_decode(&delta_s, &priors, &h, &cfg))?;
        let syndrome_mask = delta_s.iter().enumerate().fold(0u32, |acc, (j, &b)| acc | u32::from(b) << j);
        let leaders = coset_leaders(&rows, n, syndrome_mask);
        let decoded = result.error_pattern.iter().enumerate().fold(0u32, |acc, (c, &b)| acc | u32::from(b) << c);
        if result.converged {
            converged += 1;
            if lib(h.syndrome(&result.error_pattern))? == delta_s {
                syndrome_ok += 1;
            }
        }
        if leaders.len() == 1 {
            unique += 1;
            if result.converged && decoded == leaders[0] {
                agree += 1;
            }
        }
    }
    let rate = f64::from(agree) / f64::from(unique);
    check(
        syndrome_ok == converged && rate >= 0.95,
        format!(
            "{converged}/200 converged, {syndrome_ok} satisfy the syndrome; \
             {agree}/{unique} unique-leader instances match the exhaustive oracle ({:.1}%)",
            100.0 * rate
        ),
    )
}

fn c7_end_to_end() -> Outcome {
    let cfg = BlockConfig::new(4000, 8, 0.02);
    let pool = lib(CodePool::generate(4000, qkd_reconcile::ldpc::DEFAULT_POOL_SEED))?;
    let (mut failed, mut discarded, mut verified) = (0, 0, 0);
    for b in 0..100 {
        let bs = block_seed(0xe2e, b);
        let (alice, bob) = lib(gen_sifted_pair(cfg.n_b(), 0.02, seed::derive(bs, 1)))?;
        let run = lib(run_block(
            &alice,
            &bob,
            &BlockConfig {
                session_seed: bs,
                ..cfg
            },
            &pool,
        ))?;
        ensure(run.alice_key == run.bob_key, || format!("block {b}: verified keys differ"))?;
        // surviving sub-blocks must equal the reference (Bob's sifted bits)
        let survivors: Vec<u8> = run
            .report
            .fates
            .iter()
            .enumerate()
            .filter(|(_, f)| **f == SubBlockFate::Verified)
            .flat_map(|(i, _)| bob[i * cfg.n_sb()..(i + 1) * cfg.n_sb()].iter().copied())
            .collect();
        ensure(run.alice_key == survivors, || format!("block {b}: a wrong sub-block survived"))?;
        failed += run.report.sbec_failed;
        discarded += run.report.verification_discarded;
        verified += run.report.effective_sub_blocks - run.report.verification_discarded;
    }
    Ok(format!(
        "100 blocks, verified keys identical; sub-blocks verified {verified}, failed in SBEC {failed}, \
         discarded in verification {discarded}; measured FER {:.3}",
        (failed + discarded) as f64 / 800.0
    ))
}

fn c8_universality() -> Outcome {
    let field = lib(FieldParams::new(251))?;
    ensure(field.chunk_bits() == 7, || "l_p for p = 251".into())?;
    // naive evaluation of Σ x_i·k^(i−1) on the published example
    let x: Vec<u8> = "00000110000101".bytes().map(|b| b - b'0').collect();
    let tag = lib(poly_hash(&x, lib(HashKey::new(10, &field))?, &field))?;
    ensure(tag.value() == 53, || format!("example tag {}", tag.value()))?;

    let mut rng = seed::rng(251);
    let trials = 1_000_000u32;
    let mut collisions = 0u32;
    for _ in 0..trials {
        let x: Vec<u8> = (0..70).map(|_| rng.random_range(0..2)).collect();
        let mut y: Vec<u8> = (0..70).map(|_| rng.random_range(0..2)).collect();
        if x == y {
            y[0] ^= 1;
        }
        let key = HashKey::random(&mut rng, &field);
        let hx = lib(poly_hash(&x, key, &field))?;
        let hy = lib(poly_hash(&y, key, &field))?;
        if hx == hy {
            collisions += 1;
        }
    }
    let bound = 9.0 / 251.0;
    let slack = 3.0 * (bound * (1.0 - bound) / f64::from(trials)).sqrt();
    let frac = f64::from(collisions) / f64::from(trials);
    check(
        frac <= bound + slack,
        format!("collision fraction {frac:.5}, bound 9/251 = {bound:.5} + 3σ {slack:.5}"),
    )
}

fn c9_branch_accounting() -> Outcome {
    let field = FieldParams::default();
    let l_ht = field.tag_bits();
    let n_sub = 8;
    let mut rng = seed::rng(9);
    let blocks: Vec<Vec<u8>> = (0..n_sub)
        .map(|_| (0..3800).map(|_| rng.random_range(0..2)).collect())
        .collect();
    let mut lines = Vec::new();
    for corrupted in [vec![], vec![3], vec![0, 5, 7]] {
        let mut alice = blocks.clone();
        for &i in &corrupted {
            alice[i][17] ^= 1;
        }
        let mut ledger = LeakageLedger::default();
        let v = lib(run_verification(
            alice,
            blocks.clone(),
            field,
            42,
            &mut ledger,
            &mut Transcript::default(),
        ))?;
        let expected = if corrupted.is_empty() { l_ht } else { (n_sub + 1) * l_ht };
        ensure(ledger.verification_hash_bits == expected, || {
            format!("{} corrupted: {} hash bits", corrupted.len(), ledger.verification_hash_bits)
        })?;
        ensure(v.bob.discarded == corrupted, || format!("discarded {:?}", v.bob.discarded))?;
        lines.push(format!("{} corrupted → {} bits", corrupted.len(), expected));
    }
    // the same through a whole block on a clean channel
    let pool = lib(CodePool::generate(400, 1))?;
    let cfg = BlockConfig::new(400, n_sub, 0.02);
    let run = lib(run_block(&blocks.concat()[..cfg.n_b()], &blocks.concat()[..cfg.n_b()], &cfg, &pool))?;
    ensure(run.report.ledger.verification_hash_bits == l_ht, || "clean block".into())?;
    Ok(lines.join(", "))
}

fn c10_determinism() -> Outcome {
    let cfg = BlockConfig::new(4000, 8, 0.02);
    let once = |threads: usize| -> std::result::Result<Vec<BlockTrace>, String> {
        let pool = lib(CodePool::generate(4000, qkd_reconcile::ldpc::DEFAULT_POOL_SEED))?;
        let workers = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        workers.install(|| {
            (0..3)
                .map(|b| {
                    let bs = block_seed(0xd0d0, b);
                    let (alice, bob) = lib(gen_sifted_pair(cfg.n_b(), 0.02, seed::derive(bs, 1)))?;
                    let run = lib(run_block(
                        &alice,
                        &bob,
                        &BlockConfig {
                            session_seed: bs,
                            ..cfg
                        },
                        &pool,
                    ))?;
                    let report = serde_json::to_string(&run.report).map_err(|e| e.to_string())?;
                    Ok((run.transcript.to_bytes(), report, run.alice_key, run.bob_key))
                })
                .collect()
        })
    };
    let first = once(1)?;
    let second = once(4)?;
    let bytes: usize = first.iter().map(|r| r.0.len()).sum();
    check(
        first == second,
        format!("3 blocks, {bytes} transcript bytes; transcripts, reports and keys identical (1 vs 4 threads)"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("expected verification leakage", c1_leakage),
        ("per-sub-block baseline and ratio", c2_baseline),
        ("verification failure bound", c3_fail_bound),
        ("disclosure size table", c4_disclosure_table),
        ("rate selection vs brute force", c5_rate_oracle),
        ("decoder vs exhaustive coset oracle", c6_decoder_oracle),
        ("end-to-end key agreement", c7_end_to_end),
        ("hash universality at p = 251", c8_universality),
        ("verification branch accounting", c9_branch_accounting),
        ("determinism", c10_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {:>2}. {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
