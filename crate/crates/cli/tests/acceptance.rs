//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hysmc::bltl::{check, horizon, to_nnf};
use hysmc::flow::{CompiledSystem, FlowConfig};
use hysmc::model::parse_model;
use hysmc::models::{cardiac_model, Cell, Condition, Stimulus};
use hysmc::oracle::{
    brute_force_bltl, chain_reachability, depth_three_fixture, exact_transition_probs, random_formula, random_trace,
    two_guard_fixture, Quadrature,
};
use hysmc::sampler::{trajectory_rng, Sampler, SamplerConfig};
use hysmc::smc::{calibration_report, run_smc, sample_size, SmcConfig};
use hysmc_cli::{render_table_row, run_table, verify, TableOptions, Timing, VerifyOptions};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sample_sizes() -> Outcome {
    let a = sample_size(0.01, 0.01).map_err(|e| e.to_string())?;
    let b = sample_size(0.001, 0.01).map_err(|e| e.to_string())?;
    ensure(a == 459 && b == 4603, format!("N(0.01, 0.01) = {a}, N(0.001, 0.01) = {b}"))
}

fn guard_frequencies() -> Outcome {
    let trials = 10_000;
    let mut details = Vec::new();
    let mut ok = true;
    for (g1, g2, expect) in [
        ((0.1, 0.5), (0.5, 0.9), [0.5, 0.5]),
        ((0.0, 0.25), (0.25, 1.0), [0.25, 0.75]),
    ] {
        let sys = two_guard_fixture(g1, g2);
        let exact = exact_transition_probs(&sys, 0, &[0.0]);
        let sampler = Sampler::new(&sys.to_automaton(1), SamplerConfig::new(1, 0)).map_err(|e| e.to_string())?;
        let got = sampler
            .empirical_guard_probs(0, &[0.0], 0, &mut trajectory_rng(2024, 0), trials)
            .map_err(|e| e.to_string())?;
        for i in 0..2 {
            ok &= (exact.probs[i] - expect[i]).abs() < 1e-9;
            ok &= (got[i] - exact.probs[i]).abs() <= 0.02;
        }
        details.push(format!(
            "exact ({:.3}, {:.3}) sampled ({:.4}, {:.4})",
            exact.probs[0], exact.probs[1], got[0], got[1]
        ));
    }
    ensure(ok, details.join("; "))
}

fn path_distribution() -> Outcome {
    let sys = depth_three_fixture();
    let exact = chain_reachability(&sys, 3, Quadrature::default());
    let h = sys.to_automaton(3);
    let sampler = Sampler::new(&h, SamplerConfig::new(3, 11)).map_err(|e| e.to_string())?;
    let runs = 10_000;
    let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for i in 0..runs {
        let t = sampler.sample(i).map_err(|e| e.to_string())?;
        *counts.entry(t.modes).or_default() += 1;
    }
    let mut worst: f64 = 0.0;
    for path in exact.keys().chain(counts.keys()) {
        let p = exact.get(path).copied().unwrap_or(0.0);
        let q = counts.get(path).copied().unwrap_or(0) as f64 / runs as f64;
        worst = worst.max((p - q).abs());
    }
    ensure(
        worst <= 0.02,
        format!("{} exact paths, {} sampled paths, max abs error {worst:.4}", exact.len(), counts.len()),
    )
}

fn bltl_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases = 10_000;
    let (mut agree, mut nnf_agree) = (0, 0);
    let mut done = 0;
    while done < cases {
        let depth = rng.gen_range(0..=3);
        let f = random_formula(&mut rng, depth);
        let hz = horizon(&f);
        // the reference checker needs the trace to cover the horizon
        if hz >= 8 {
            continue;
        }
        let len = rng.gen_range(hz + 1..=8);
        let t = random_trace(&mut rng, len);
        let expect = brute_force_bltl(&f, &t);
        if check(&f, &t, 0) == Ok(expect) {
            agree += 1;
        }
        if check(&to_nnf(&f), &t, 0) == Ok(expect) {
            nnf_agree += 1;
        }
        done += 1;
    }
    ensure(
        agree == cases && nnf_agree == cases,
        format!("checker {agree}/{cases}, NNF {nnf_agree}/{cases}"),
    )
}

fn calibration() -> Outcome {
    let (delta, alpha) = (0.01, 0.01);
    let sure = calibration_report(delta, alpha, 1.0, 1000, 1).map_err(|e| e.to_string())?;
    let edge = calibration_report(delta, alpha, 1.0 - delta, 1000, 2).map_err(|e| e.to_string())?;
    let q = edge.expected_h0_rate;
    let sigma = (q * (1.0 - q) / edge.repetitions as f64).sqrt();
    let bound = alpha + 3.0 * sigma;
    ensure(
        sure.h1 == 0 && edge.h0_rate <= bound,
        format!(
            "p = 1: {} H1 of 1000; p = 1 - delta: H0 rate {:.4} (exact {:.4}, bound {:.4})",
            sure.h1, edge.h0_rate, q, bound
        ),
    )
}

fn table() -> Outcome {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let opts = TableOptions {
        threads,
        ..TableOptions::default()
    };
    let rows = run_table(&opts, |r| println!("    {}", render_table_row(r))).map_err(|e| e.to_string())?;
    let matched = rows.iter().filter(|r| r.matches).count();
    ensure(
        matched == 22 && rows.len() == 22,
        format!("{matched}/{} rows match (substeps {})", rows.len(), opts.substeps),
    )
}

/// Largest gap between the empirical CDFs of two samples of mode indices.
fn ks_statistic(a: &[usize], b: &[usize], modes: usize) -> f64 {
    let cdf = |s: &[usize], m: usize| s.iter().filter(|&&x| x <= m).count() as f64 / s.len() as f64;
    (0..modes).map(|m| (cdf(a, m) - cdf(b, m)).abs()).fold(0.0, f64::max)
}

fn j_sensitivity() -> Outcome {
    let h = cardiac_model(Cell::Epi, Condition::Healthy, Stimulus::Transient);
    // the upstroke lands on the same steps in every realization, so the checkpoints
    // sit in the repolarization window (steps ~2590..2860) where switch times spread
    let checkpoints = [2594usize, 2596, 2598, 2671, 2856];
    let last = *checkpoints.last().unwrap();
    let realizations = 1000;
    let modes_at = |points: usize, seed: u64| -> Result<Vec<Vec<usize>>, String> {
        let mut cfg = SamplerConfig::new(last, seed);
        cfg.points = points;
        cfg.flow.substeps = 10;
        let s = Sampler::new(&h, cfg).map_err(|e| e.to_string())?;
        let mut out = vec![Vec::with_capacity(realizations); checkpoints.len()];
        for i in 0..realizations as u64 {
            let t = s.sample(i).map_err(|e| e.to_string())?;
            for (c, &k) in checkpoints.iter().enumerate() {
                out[c].push(t.mode(k));
            }
        }
        Ok(out)
    };
    let coarse = modes_at(10, 101)?;
    let fine = modes_at(100, 202)?;
    let critical = 1.358 * (2.0 / realizations as f64).sqrt();
    let stats: Vec<f64> = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| ks_statistic(a, b, h.modes.len()))
        .collect();
    let accepted = stats.iter().filter(|&&d| d <= critical).count();
    let shown: Vec<String> = stats.iter().map(|d| format!("{d:.3}")).collect();
    ensure(
        accepted >= 4,
        format!(
            "{accepted}/5 checkpoints not rejected, D = [{}], critical {critical:.4}",
            shown.join(", ")
        ),
    )
}

fn determinism() -> Outcome {
    let zero = Timing {
        wall_seconds: 0.0,
        sample_mean_seconds: 0.0,
        sample_min_seconds: 0.0,
        sample_max_seconds: 0.0,
    };
    for (model, property) in [
        ("builtin:cardiac?cell=mid&cond=diseased&stim=transient", "F<=500(![Resting mode])"),
        ("builtin:cardiac?cell=endo&cond=healthy&stim=transient", "F<=500(![Resting mode])"),
    ] {
        let mut reports = Vec::new();
        for threads in [1, 8] {
            let mut o = VerifyOptions::new(model, property);
            o.substeps = 10;
            o.seed = 9;
            o.threads = threads;
            let (mut r, _, _) = verify(&o).map_err(|e| e.to_string())?;
            r.timing = zero.clone();
            reports.push(serde_json::to_string(&r).map_err(|e| e.to_string())?);
        }
        if reports[0] != reports[1] {
            return Err(format!("{model}: reports differ between 1 and 8 threads"));
        }
    }

    // a property that fails on about half the trajectories, so the stop
    // index depends on which draw fails first
    let sys = two_guard_fixture((0.1, 0.5), (0.5, 0.9));
    let h = sys.to_automaton(2);
    let psi = hysmc::bltl::parse_bltl("F<=1([q1])", &h.labels()).map_err(|e| e.to_string())?;
    for seed in 0..20 {
        let mut runs = Vec::new();
        for threads in [1, 8] {
            let mut cfg = SmcConfig::new(0.01, 0.01, seed);
            cfg.threads = threads;
            let v = run_smc(&h, &psi, &cfg, SamplerConfig::new(2, 0)).map_err(|e| e.to_string())?;
            runs.push((v.decision, v.samples, v.counterexample.map(|t| (t.index, t.modes))));
        }
        if runs[0] != runs[1] {
            return Err(format!("toy seed {seed}: {:?} vs {:?}", runs[0], runs[1]));
        }
    }
    Ok("cardiac H1 and H0 reports identical; 20 toy seeds identical".into())
}

fn integrator_order() -> Outcome {
    let h = parse_model(
        "delta 1\nhorizon 1\n[variables]\nx\n[init]\ndistribution = uniform\nx = (0.5, 1.5)\n\
         [modes]\nmode decay\n  ode x = -x\n",
    )
    .map_err(|e| e.to_string())?;
    let sys = CompiledSystem::new(&h).map_err(|e| e.to_string())?;
    let exact = (-1.0f64).exp();
    let err = |substeps: usize| -> Result<f64, String> {
        let x = sys
            .flow(0, 1.0, &[1.0], 0.0, FlowConfig { substeps })
            .map_err(|e| e.to_string())?;
        Ok((x[0] - exact).abs())
    };
    let coarse = err(10)?;
    let fine = err(20)?;
    let ratio = coarse / fine;
    ensure(
        (8.0..=32.0).contains(&ratio),
        format!("error {coarse:.3e} -> {fine:.3e}, ratio {ratio:.2}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("sample sizes", sample_sizes),
        ("guard frequencies vs exact probabilities", guard_frequencies),
        ("path distribution vs quadrature", path_distribution),
        ("checker vs brute-force BLTL", bltl_equivalence),
        ("sequential test calibration", calibration),
        ("reference table", table),
        ("J = 10 vs J = 100 mode distributions", j_sensitivity),
        ("determinism across thread counts", determinism),
        ("RK4 convergence order", integrator_order),
    ];
    // optional criterion numbers on the command line select a subset
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {}: PASS  {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
