//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgesim::campaign::{bench_sweep, validate_equivalence, worker_pool, Sweep, SweepVar};
use edgesim::engine::{run_scenario, run_scenario_opts, Engine, RunOptions};
use edgesim::metrics::MetricsSummary;
use edgesim::registry::RegistryStrategy;
use edgesim::stats::{ks_p_value, ks_statistic, ks_test};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mobility_equivalence() -> Outcome {
    let mut moves = 0;
    for (i, b) in common::battery(50, 0x1001).iter().enumerate() {
        moves += common::check_mobility_equivalence(b).map_err(|e| format!("scenario {i}: {e}"))?;
    }
    Ok(format!("50 scenarios, {moves} movements compared"))
}

fn load_equivalence() -> Outcome {
    let mut tasks = 0;
    for (i, b) in common::battery(50, 0x2002).iter().enumerate() {
        let (eager, lazy) = common::load_arrivals(b).map_err(|e| e.to_string())?;
        ensure(eager == lazy, || {
            format!("scenario {i}: eager {} arrivals, lazy {} arrivals, multisets differ", eager.len(), lazy.len())
        })?;
        tasks += eager.len();
    }
    Ok(format!("50 scenarios, {tasks} arrivals identical"))
}

fn determinism() -> Outcome {
    let cfg = common::desk();
    let mut rng = ChaCha8Rng::seed_from_u64(0x3003);
    let json = |s: &MetricsSummary| serde_json::to_string(&s.without_timing()).unwrap();
    for _ in 0..5 {
        let seed: u64 = rng.random();
        let mut per_engine = Vec::new();
        for engine in Engine::ALL {
            let a = run_scenario(&cfg, engine, seed).map_err(|e| e.to_string())?.0;
            let b = run_scenario(&cfg, engine, seed).map_err(|e| e.to_string())?.0;
            ensure(json(&a) == json(&b), || format!("{engine} seed {seed}: repeated run differs"))?;
            per_engine.push(a);
        }
        let (b, r) = (&per_engine[0], &per_engine[1]);
        let key = |s: &MetricsSummary| (s.tasks_generated, s.failed_network, s.failed_mobility, s.failed_vm);
        ensure(key(b) == key(r), || format!("seed {seed}: baseline {:?} vs renovated {:?}", key(b), key(r)))?;
    }
    Ok("5 seeds x 2 engines reproducible; engines agree under matched seeds".into())
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4004);
    let mut events = 0;
    for i in 0..20 {
        let cfg = common::random_config(&mut rng);
        let engine = Engine::ALL[i % 2];
        let opts = RunOptions { check_invariants: true, keep_records: true, ..RunOptions::default() };
        let out = run_scenario_opts(&cfg, engine, cfg.master_seed, &opts).map_err(|e| format!("run {i}: {e}"))?;
        let s = &out.summary;
        ensure(s.tasks_generated == s.completed + s.failed(), || format!("run {i}: task accounting broken"))?;
        ensure(out.final_vm_utilization == 0, || {
            format!("run {i}: VM utilization left at {}", out.final_vm_utilization)
        })?;
        ensure(out.final_wan_transfers == 0, || format!("run {i}: {} WAN transfers left", out.final_wan_transfers))?;
        ensure(out.events_scheduled == out.stats.events_dispatched + out.events_remaining, || {
            format!("run {i}: event accounting broken")
        })?;
        ensure(MetricsSummary::from_records(&out.records, &out.stats) == *s, || {
            format!("run {i}: summary differs from record recount")
        })?;
        events += out.stats.events_dispatched;
    }
    Ok(format!("20 runs, device counts checked after each of {events} events"))
}

fn ks_correctness() -> Outcome {
    let cases: [(&[f64], &[f64], f64); 3] = [
        (&[3.0, 1.0, 2.0], &[3.0, 1.0, 2.0], 0.0),
        (&[1.0, 2.0], &[1.5, 2.5], 0.5),
        (&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 4.0, 5.0], 0.25),
    ];
    for (a, b, want) in cases {
        let d = ks_statistic(a, b).map_err(|e| e.to_string())?;
        ensure((d - want).abs() <= 1e-12, || format!("D({a:?}, {b:?}) = {d}, want {want}"))?;
    }
    let p = ks_p_value(0.036, 500, 500);
    ensure((0.88..=0.91).contains(&p), || format!("p(0.036, 500, 500) = {p}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5005);
    let trials = 1000;
    let rejected = (0..trials)
        .filter(|_| {
            let a: Vec<f64> = (0..500).map(|_| rng.random()).collect();
            let b: Vec<f64> = (0..500).map(|_| rng.random()).collect();
            ks_test(&a, &b).unwrap().rejects_at(0.05)
        })
        .count();
    let rate = rejected as f64 / trials as f64;
    ensure((0.02..=0.08).contains(&rate), || format!("rejection rate {rate}"))?;
    Ok(format!("tabulated D exact, p(0.036) = {p:.4}, rejection rate {rate:.3}"))
}

fn validation_campaign() -> Outcome {
    let cfg = common::desk();
    ensure(cfg.device_count == 100 && cfg.duration_min == 10.0, || "desk scenario is not 100 devices x 10 min".into())?;
    let pool = worker_pool(None).map_err(|e| e.to_string())?;
    let report = validate_equivalence(&cfg, 200, false, &pool).map_err(|e| e.to_string())?;
    let rejected: Vec<String> = report
        .ks
        .iter()
        .filter(|r| r.reject_at_alpha)
        .map(|r| format!("{}/{} p={:.4}", r.architecture, r.metric, r.p_value))
        .collect();
    let min_p = report.ks.iter().map(|r| r.p_value).fold(1.0, f64::min);
    let accepted = report.accepted_cells();
    ensure(accepted >= 14, || format!("{accepted}/15 cells accepted; rejected: {}", rejected.join(", ")))?;
    Ok(format!("{accepted}/15 cells with p > 0.05 (min p {min_p:.4})"))
}

fn queue_scaling() -> Outcome {
    let mut cfg = common::desk();
    cfg.device_count = 200;
    let mut ratios = Vec::new();
    for engine in Engine::ALL {
        let peak = |minutes: f64| -> Result<usize, String> {
            let c = edgesim::scenario::ScenarioConfig { duration_min: minutes, ..cfg.clone() };
            Ok(run_scenario(&c, engine, 11).map_err(|e| e.to_string())?.1.peak_queue_size)
        };
        let (short, long) = (peak(30.0)?, peak(150.0)?);
        ratios.push((engine, short, long, long as f64 / short as f64));
    }
    let (_, bs, bl, br) = ratios[0];
    let (_, rs, rl, rr) = ratios[1];
    let detail = format!("baseline {bs} -> {bl} ({br:.2}x), renovated {rs} -> {rl} ({rr:.2}x)");
    ensure(br >= 4.0 && rr <= 1.1, || detail.clone())?;
    Ok(detail)
}

fn registry_probes() -> Outcome {
    let mut cfg = common::desk();
    cfg.device_count = 220;
    cfg.duration_min = 30.0;
    let run = |registry| {
        let opts = RunOptions { registry: Some(registry), ..RunOptions::default() };
        run_scenario_opts(&cfg, Engine::Renovated, 13, &opts).map_err(|e| e.to_string())
    };
    let (append, pruned) = (run(RegistryStrategy::AppendOnly)?, run(RegistryStrategy::Pruned)?);
    let tasks = append.summary.tasks_generated;
    ensure((8_000..=12_000).contains(&tasks), || format!("{tasks} tasks, wanted about 10k"))?;
    let ratio = append.registry.probes as f64 / pruned.registry.probes as f64;
    let detail = format!(
        "{tasks} tasks: append-only {} probes, pruned {} ({ratio:.0}x)",
        append.registry.probes, pruned.registry.probes
    );
    ensure(ratio >= 20.0, || detail.clone())?;
    Ok(detail)
}

fn speedup_trend() -> Outcome {
    let cfg = common::sweep_scenario();
    ensure(cfg.duration_min == 30.0, || "sweep scenario is not 30 min".into())?;
    let sweep = Sweep { var: SweepVar::Devices, values: vec![200.0, 400.0, 600.0, 800.0, 1000.0] };
    let pool = worker_pool(Some(1)).map_err(|e| e.to_string())?;
    let rows = bench_sweep(&cfg, &sweep, 10, &pool).map_err(|e| e.to_string())?;
    let mut speedups = Vec::new();
    for pair in rows.chunks(2) {
        let (b, r) = (&pair[0], &pair[1]);
        debug_assert!(b.engine == Engine::Baseline && r.engine == Engine::Renovated);
        ensure(r.mean_wall_s < b.mean_wall_s, || {
            format!("{} devices: renovated {:.4}s not below baseline {:.4}s", b.value, r.mean_wall_s, b.mean_wall_s)
        })?;
        speedups.push((b.value, b.mean_wall_s / r.mean_wall_s));
    }
    let detail = speedups.iter().map(|(d, s)| format!("{d}:{s:.1}x")).collect::<Vec<_>>().join(" ");
    ensure(speedups.windows(2).all(|w| w[1].1 >= w[0].1), || format!("speedup not non-decreasing: {detail}"))?;
    Ok(format!("speedup {detail}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("mobility strategies agree exactly", mobility_equivalence),
        ("load strategies agree exactly", load_equivalence),
        ("determinism and matched-seed equality", determinism),
        ("conservation on randomized runs", conservation),
        ("KS statistic, p-value and calibration", ks_correctness),
        ("desk-scale validation campaign", validation_campaign),
        ("event-queue scaling", queue_scaling),
        ("registry probe asymptotics", registry_probes),
        ("speedup trend over device sweep", speedup_trend),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| *f == n.to_string() || name.contains(f.as_str())) {
            continue;
        }
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{n}] {name} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{n}] {name} ({secs:.1}s): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
