//! Multi-run campaigns: runtime sweeps and the cross-engine statistical
//! comparison, plus their CSV outputs.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{run_scenario_opts, Engine, RunOptions, RunOutput};
use crate::error::SimError;
use crate::metrics::MetricsSummary;
use crate::orchestration::PlacementPolicy;
use crate::rng::mix64;
use crate::scenario::ScenarioConfig;
use crate::stats::{ks_test, qq_pairs, DEFAULT_ALPHA};

/// Caps campaign worker threads.
pub const THREADS_ENV: &str = "EDGESIM_THREADS";

/// Threshold used for the orchestrator architecture when the scenario
/// itself does not configure one.
pub const DEFAULT_ORCHESTRATOR_THRESHOLD_PCT: f64 = 80.0;

/// Which seed family a run draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedFamily {
    /// Both engines see the same seeds.
    Shared,
    /// Each engine has its own independent seeds.
    PerEngine(Engine),
}

/// Seed of the `iteration`-th run. Pure, so campaigns are reproducible.
pub fn seed_for(master: u64, family: SeedFamily, iteration: u64) -> u64 {
    let tag = match family {
        SeedFamily::Shared => 0x5eed_0000,
        SeedFamily::PerEngine(Engine::Baseline) => 0x5eed_0001,
        SeedFamily::PerEngine(Engine::Renovated) => 0x5eed_0002,
    };
    mix64(mix64(master ^ mix64(tag)).wrapping_add(iteration))
}

pub fn worker_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, SimError> {
    let threads = threads.or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.parse().ok())).unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SimError::InvalidArgument(format!("cannot start worker pool: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Devices,
    DurationMin,
}

impl SweepVar {
    pub fn label(self) -> &'static str {
        match self {
            SweepVar::Devices => "devices",
            SweepVar::DurationMin => "duration-min",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut cfg = base.clone();
        match self.var {
            SweepVar::Devices => cfg.device_count = value as usize,
            SweepVar::DurationMin => cfg.duration_min = value,
        }
        cfg
    }
}

impl FromStr for Sweep {
    type Err = String;

    /// `devices=200:1000:200` or `duration-min=30:150:30` (start:stop:step,
    /// stop inclusive), or a comma list such as `devices=200,400`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, range) = s.split_once('=').ok_or_else(|| format!("sweep `{s}` lacks `=`"))?;
        let var = match name {
            "devices" => SweepVar::Devices,
            "duration-min" => SweepVar::DurationMin,
            other => return Err(format!("unknown sweep variable `{other}`")),
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"));
        let values = if range.contains(':') {
            let parts: Vec<_> = range.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err(format!("range `{range}` must be start:stop:step"));
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(format!("empty or invalid range `{range}`"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|i| start + i as f64 * step).collect()
        } else {
            range.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        if values.is_empty() || values.iter().any(|v| !(*v > 0.0)) {
            return Err(format!("sweep values must be positive: `{range}`"));
        }
        if var == SweepVar::Devices && values.iter().any(|v| v.fract() != 0.0) {
            return Err("device counts must be integers".into());
        }
        Ok(Sweep { var, values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub sweep_var: &'static str,
    pub value: f64,
    pub engine: Engine,
    pub mean_wall_s: f64,
    pub sd_wall_s: f64,
    pub mean_peak_queue: f64,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Times both engines at every sweep point. Iteration `i` uses the same
/// seed for both engines; iterations use distinct seeds.
pub fn bench_sweep(
    base: &ScenarioConfig,
    sweep: &Sweep,
    iterations: usize,
    pool: &rayon::ThreadPool,
) -> Result<Vec<BenchRow>, SimError> {
    if iterations == 0 {
        return Err(SimError::InvalidArgument("iterations must be positive".into()));
    }
    let configs: Vec<_> = sweep.values.iter().map(|&v| sweep.apply(base, v)).collect();
    for cfg in &configs {
        cfg.validate()?;
    }
    // Iteration-major order: slow drift in host speed then touches every
    // sweep point and engine alike instead of biasing the later points.
    let jobs: Vec<(usize, usize, Engine)> = (0..iterations)
        .flat_map(|i| (0..configs.len()).flat_map(move |p| Engine::ALL.into_iter().map(move |e| (i, p, e))))
        .collect();
    let opts = RunOptions::default();
    let results: Vec<(f64, f64)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(i, p, engine)| {
                let cfg = &configs[p];
                let seed = seed_for(cfg.master_seed, SeedFamily::Shared, i as u64);
                let out = run_scenario_opts(cfg, engine, seed, &opts)?;
                Ok((out.stats.wall_time.as_secs_f64(), out.stats.peak_queue_size as f64))
            })
            .collect::<Result<_, SimError>>()
    })?;
    let mut rows = Vec::new();
    for (p, &value) in sweep.values.iter().enumerate() {
        for engine in Engine::ALL {
            let res: Vec<(f64, f64)> = jobs
                .iter()
                .zip(&results)
                .filter(|((_, jp, je), _)| *jp == p && *je == engine)
                .map(|(_, r)| *r)
                .collect();
            let walls: Vec<f64> = res.iter().map(|r| r.0).collect();
            let (mean_wall_s, sd_wall_s) = mean_sd(&walls);
            rows.push(BenchRow {
                sweep_var: sweep.var.label(),
                value,
                engine,
                mean_wall_s,
                sd_wall_s,
                mean_peak_queue: res.iter().map(|r| r.1).sum::<f64>() / res.len() as f64,
            });
        }
    }
    Ok(rows)
}

/// The five compared metrics, in report order.
pub const METRICS: [&str; 5] =
    ["tasks_generated", "failed_rel_pct", "avg_service_time_s", "failed_mobility", "failed_vm"];

pub fn metric_value(summary: &MetricsSummary, metric: &str) -> Option<f64> {
    match metric {
        "tasks_generated" => Some(summary.tasks_generated as f64),
        "failed_rel_pct" => Some(summary.failed_rel_pct),
        "avg_service_time_s" => summary.avg_service_time_s,
        "failed_mobility" => Some(summary.failed_mobility as f64),
        "failed_vm" => Some(summary.failed_vm as f64),
        _ => None,
    }
}

/// The three compared architectures.
pub fn architectures(cfg: &ScenarioConfig) -> [PlacementPolicy; 3] {
    let threshold = match cfg.policy {
        PlacementPolicy::TwoTierWithOrchestrator { edge_utilization_threshold_pct } => edge_utilization_threshold_pct,
        _ => DEFAULT_ORCHESTRATOR_THRESHOLD_PCT,
    };
    [
        PlacementPolicy::SingleTier,
        PlacementPolicy::TwoTier,
        PlacementPolicy::TwoTierWithOrchestrator { edge_utilization_threshold_pct: threshold },
    ]
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub architecture: &'static str,
    pub engine: Engine,
    pub seed: u64,
    pub tasks_generated: u64,
    pub completed: u64,
    pub failed_network: u64,
    pub failed_mobility: u64,
    pub failed_vm: u64,
    pub failed_rel_pct: f64,
    pub avg_service_time_s: Option<f64>,
    pub wall_time_s: f64,
    pub peak_queue_size: u64,
}

impl MetricsRow {
    pub fn new(architecture: &'static str, out: &RunOutput) -> Self {
        let s = &out.summary;
        Self {
            architecture,
            engine: out.engine,
            seed: out.seed,
            tasks_generated: s.tasks_generated,
            completed: s.completed,
            failed_network: s.failed_network,
            failed_mobility: s.failed_mobility,
            failed_vm: s.failed_vm,
            failed_rel_pct: s.failed_rel_pct,
            avg_service_time_s: s.avg_service_time_s,
            wall_time_s: s.wall_time_s,
            peak_queue_size: s.peak_queue_size,
        }
    }
}

/// One row of `run_stats.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunStatsRow {
    pub engine: Engine,
    pub seed: u64,
    pub events_dispatched: u64,
    pub peak_queue_size: usize,
    pub wall_time_seconds: f64,
}

impl From<&RunOutput> for RunStatsRow {
    fn from(out: &RunOutput) -> Self {
        Self {
            engine: out.engine,
            seed: out.seed,
            events_dispatched: out.stats.events_dispatched,
            peak_queue_size: out.stats.peak_queue_size,
            wall_time_seconds: out.stats.wall_time.as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsRow {
    pub architecture: &'static str,
    pub metric: &'static str,
    pub d: f64,
    pub p_value: f64,
    pub reject_at_alpha: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QqRow {
    pub architecture: &'static str,
    pub baseline: f64,
    pub renovated: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub ks: Vec<KsRow>,
    /// Q-Q pairs per metric, in [`METRICS`] order.
    pub qq: Vec<(&'static str, Vec<QqRow>)>,
    pub runs: Vec<MetricsRow>,
}

impl ValidationReport {
    pub fn accepted_cells(&self) -> usize {
        self.ks.iter().filter(|r| !r.reject_at_alpha).count()
    }
}

/// Runs `runs_per_engine` simulations per engine for each architecture and
/// compares the engines' metric distributions.
///
/// Unless `shared_seeds` is set, the engines draw from independent seed
/// families, so agreement is distributional rather than run-by-run.
pub fn validate_equivalence(
    cfg: &ScenarioConfig,
    runs_per_engine: usize,
    shared_seeds: bool,
    pool: &rayon::ThreadPool,
) -> Result<ValidationReport, SimError> {
    if runs_per_engine < 30 {
        return Err(SimError::InvalidArgument(format!("need at least 30 runs per engine, got {runs_per_engine}")));
    }
    cfg.validate()?;
    let mut report = ValidationReport::default();
    let mut qq: Vec<Vec<QqRow>> = vec![Vec::new(); METRICS.len()];
    let opts = RunOptions::default();
    for policy in architectures(cfg) {
        let arch_cfg = ScenarioConfig { policy, ..cfg.clone() };
        let jobs: Vec<(Engine, u64)> =
            Engine::ALL.into_iter().flat_map(|e| (0..runs_per_engine as u64).map(move |i| (e, i))).collect();
        let outputs: Vec<RunOutput> = pool.install(|| {
            jobs.par_iter()
                .map(|&(engine, i)| {
                    let family = if shared_seeds { SeedFamily::Shared } else { SeedFamily::PerEngine(engine) };
                    run_scenario_opts(&arch_cfg, engine, seed_for(cfg.master_seed, family, i), &opts)
                })
                .collect::<Result<_, SimError>>()
        })?;
        let label = policy.label();
        for (mi, metric) in METRICS.into_iter().enumerate() {
            let sample = |engine: Engine| -> Vec<f64> {
                outputs.iter().filter(|o| o.engine == engine).filter_map(|o| metric_value(&o.summary, metric)).collect()
            };
            let (base, reno) = (sample(Engine::Baseline), sample(Engine::Renovated));
            let ks = ks_test(&base, &reno)?;
            report.ks.push(KsRow {
                architecture: label,
                metric,
                d: ks.d,
                p_value: ks.p_value,
                reject_at_alpha: ks.rejects_at(DEFAULT_ALPHA),
            });
            qq[mi].extend(qq_pairs(&base, &reno)?.into_iter().map(|(b, r)| QqRow {
                architecture: label,
                baseline: b,
                renovated: r,
            }));
        }
        report.runs.extend(outputs.iter().map(|o| MetricsRow::new(label, o)));
    }
    report.qq = METRICS.into_iter().zip(qq).collect();
    Ok(report)
}

/// Writes `rows` to `path` through a temporary sibling and a rename, so a
/// partially written file never appears under the final name.
pub fn write_csv_atomic<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), SimError> {
    let tmp = path.with_extension("csv.partial");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_validation(report: &ValidationReport, dir: &Path) -> Result<(), SimError> {
    fs::create_dir_all(dir)?;
    write_csv_atomic(&dir.join("metrics.csv"), &report.runs)?;
    for (metric, rows) in &report.qq {
        write_csv_atomic(&dir.join(format!("qq_{metric}.csv")), rows)?;
    }
    write_csv_atomic(&dir.join("ks_report.csv"), &report.ks)
}
