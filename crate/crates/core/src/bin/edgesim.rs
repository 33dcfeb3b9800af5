use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use edgesim::campaign::{
    bench_sweep, validate_equivalence, worker_pool, write_csv_atomic, write_validation, MetricsRow, RunStatsRow, Sweep,
};
use edgesim::engine::{run_scenario_with_sink, Engine, RunOptions};
use edgesim::orchestration::{TaskRecord, TaskStatus};
use edgesim::scenario::parse_scenario;

const DEFAULT_SNAPSHOT_PERIOD_S: f64 = 60.0;

#[derive(Parser)]
#[command(name = "edgesim", version, about = "Discrete-event simulator for edge/cloud task offloading")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "renovated")]
        engine: Engine,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Log device counts per access point to locations.csv.
        #[arg(long)]
        snapshots: bool,
        /// Write every task's outcome to tasks.csv.
        #[arg(long)]
        tasks: bool,
    },
    /// Time both engines over a sweep, e.g. `devices=200:1000:200`.
    Bench {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        sweep: Sweep,
        #[arg(long, default_value_t = 30)]
        iterations: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, env = "EDGESIM_THREADS")]
        threads: Option<usize>,
    },
    /// Compare the engines' metric distributions with KS tests.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 500)]
        runs: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Give both engines the same seeds instead of independent ones.
        #[arg(long)]
        shared_seeds: bool,
        #[arg(long, env = "EDGESIM_THREADS")]
        threads: Option<usize>,
    },
}

#[derive(Serialize)]
struct TaskRow {
    task_id: u64,
    device: u32,
    profile: u16,
    arrival_s: f64,
    status: TaskStatus,
    uses_wan: bool,
    finished_at_s: Option<f64>,
    service_time_s: Option<f64>,
}

impl From<&TaskRecord> for TaskRow {
    fn from(r: &TaskRecord) -> Self {
        Self {
            task_id: r.properties.id.0,
            device: r.properties.device.0,
            profile: r.properties.profile,
            arrival_s: r.properties.arrival.secs(),
            status: r.status,
            uses_wan: r.uses_wan,
            finished_at_s: r.finished_at.map(|t| t.secs()),
            service_time_s: r.service_time(),
        }
    }
}

fn run(scenario: &Path, engine: Engine, seed: u64, out: &Path, snapshots: bool, tasks: bool) -> Result<()> {
    let mut cfg = parse_scenario(scenario)?;
    if snapshots && cfg.snapshot_period_s.is_none() {
        cfg.snapshot_period_s = Some(DEFAULT_SNAPSHOT_PERIOD_S);
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let opts = RunOptions { snapshots, keep_records: tasks, ..RunOptions::default() };
    let result = if snapshots {
        let tmp = out.join("locations.csv.partial");
        let mut sink = csv::Writer::from_path(&tmp)?;
        let result = run_scenario_with_sink(&cfg, engine, seed, &opts, &mut sink)?;
        sink.flush()?;
        drop(sink);
        fs::rename(&tmp, out.join("locations.csv"))?;
        result
    } else {
        run_scenario_with_sink(&cfg, engine, seed, &opts, &mut Vec::new())?
    };
    write_csv_atomic(&out.join("metrics.csv"), &[MetricsRow::new(cfg.policy.label(), &result)])?;
    write_csv_atomic(&out.join("run_stats.csv"), &[RunStatsRow::from(&result)])?;
    if tasks {
        let rows: Vec<TaskRow> = result.records.iter().map(TaskRow::from).collect();
        write_csv_atomic(&out.join("tasks.csv"), &rows)?;
    }
    println!("{}", serde_json::to_string_pretty(&result.summary)?);
    Ok(())
}

fn bench(scenario: &Path, sweep: &Sweep, iterations: usize, out: &Path, threads: Option<usize>) -> Result<()> {
    let cfg = parse_scenario(scenario)?;
    let pool = worker_pool(threads)?;
    let rows = bench_sweep(&cfg, sweep, iterations, &pool)?;
    fs::create_dir_all(out)?;
    write_csv_atomic(&out.join("bench.csv"), &rows)?;
    for pair in rows.chunks(2) {
        if let [b, r] = pair {
            println!(
                "{}={}: baseline {:.4}s  renovated {:.4}s  speedup {:.2}x",
                b.sweep_var,
                b.value,
                b.mean_wall_s,
                r.mean_wall_s,
                b.mean_wall_s / r.mean_wall_s
            );
        }
    }
    Ok(())
}

fn validate(scenario: &Path, runs: usize, out: &Path, shared_seeds: bool, threads: Option<usize>) -> Result<()> {
    let cfg = parse_scenario(scenario)?;
    let pool = worker_pool(threads)?;
    let report = validate_equivalence(&cfg, runs, shared_seeds, &pool)?;
    write_validation(&report, out)?;
    for row in &report.ks {
        println!(
            "{:<28} {:<20} D={:.4} p={:.4}{}",
            row.architecture,
            row.metric,
            row.d,
            row.p_value,
            if row.reject_at_alpha { "  REJECT" } else { "" }
        );
    }
    println!("{}/{} cells not rejected", report.accepted_cells(), report.ks.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, engine, seed, out, snapshots, tasks } => {
            run(scenario, *engine, *seed, out, *snapshots, *tasks)
        }
        Command::Bench { scenario, sweep, iterations, out, threads } => {
            bench(scenario, sweep, *iterations, out, *threads)
        }
        Command::Validate { scenario, runs, out, shared_seeds, threads } => {
            validate(scenario, *runs, out, *shared_seeds, *threads)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
