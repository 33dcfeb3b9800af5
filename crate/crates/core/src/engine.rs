//! Full simulation runs.
//!
//! The baseline engine precomputes every trajectory, enqueues every task
//! arrival before the clock starts and keeps an append-only task list. The
//! renovated engine moves devices on events, generates load one active
//! period at a time and prunes finished tasks. Both share the task
//! lifecycle below and, given the same seed, draw identical variates.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::error::SimError;
use crate::kernel::{Event, EventKind, EventTag, Kernel, RunStats};
use crate::load::{generate_all, schedule_lazy, ProfileIndex, TaskIds, TaskProperties, TaskTypeProfile};
use crate::metrics::{location_snapshot, MetricsCollector, MetricsSummary, SnapshotRow, SnapshotSink};
use crate::mobility::{AccessPoint, MobilityState, PrecomputedMobility};
use crate::network::NetworkState;
use crate::orchestration::{
    deliver_result, execution_time, select_target, Datacenters, Delivery, PlacementPolicy, TaskRecord, TaskStatus,
    Utilization,
};
use crate::registry::{Registry, RegistryStats, RegistryStrategy};
use crate::rng::{DeviceStream, DeviceStreams, Purpose, Uniform};
use crate::scenario::ScenarioConfig;
use crate::types::{ApId, DeviceId, SimTime, TaskId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Baseline,
    Renovated,
}

impl Engine {
    pub const ALL: [Engine; 2] = [Engine::Baseline, Engine::Renovated];

    pub fn label(self) -> &'static str {
        match self {
            Engine::Baseline => "baseline",
            Engine::Renovated => "renovated",
        }
    }

    pub fn default_registry(self) -> RegistryStrategy {
        match self {
            Engine::Baseline => RegistryStrategy::AppendOnly,
            Engine::Renovated => RegistryStrategy::Pruned,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(Engine::Baseline),
            "renovated" => Ok(Engine::Renovated),
            other => Err(format!("unknown engine `{other}` (expected baseline or renovated)")),
        }
    }
}

/// Optional instrumentation for a run. Everything is off by default.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the engine's registry strategy.
    pub registry: Option<RegistryStrategy>,
    /// Log per-access-point device counts every `snapshot_period_s`.
    pub snapshots: bool,
    /// Keep a copy of every terminal task record.
    pub keep_records: bool,
    /// Keep `(kind, time, seq)` of every dispatched event.
    pub trace: bool,
    /// Keep the properties of every task as it arrives.
    pub census: bool,
    /// Re-verify conservation invariants after every event.
    pub check_invariants: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub tag: EventTag,
    pub time: f64,
    pub seq: u64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub engine: Engine,
    pub seed: u64,
    pub summary: MetricsSummary,
    pub stats: RunStats,
    pub registry: RegistryStats,
    pub events_scheduled: u64,
    pub events_remaining: u64,
    /// Sum of VM utilization after the drain, in hundredths of a percent.
    pub final_vm_utilization: u64,
    pub final_wan_transfers: u32,
    pub records: Vec<TaskRecord>,
    pub trace: Vec<TraceEntry>,
    pub census: Vec<TaskProperties>,
    pub snapshots: Vec<SnapshotRow>,
}

enum Mobility {
    Precomputed(PrecomputedMobility),
    EventDriven(MobilityState),
}

impl Mobility {
    fn location_of(&self, device: DeviceId, now: SimTime) -> ApId {
        match self {
            Mobility::Precomputed(m) => m.location_of(device, now),
            Mobility::EventDriven(m) => m.location_of(device),
        }
    }

    fn device_count_at(&self, loc: ApId, now: SimTime) -> Result<u32, SimError> {
        Ok(match self {
            Mobility::Precomputed(m) => m.device_count_at(loc, now)?,
            Mobility::EventDriven(m) => m.device_count_at(loc)?,
        })
    }
}

/// Picks one profile per device by cumulative weight.
pub fn assign_profiles(cfg: &ScenarioConfig, seed: u64) -> Vec<ProfileIndex> {
    (0..cfg.device_count)
        .map(|d| {
            let u = DeviceStream::new(seed, DeviceId(d as u32), Purpose::ProfileAssignment).next_uniform();
            let mut acc = 0.0;
            for (i, p) in cfg.profiles.iter().enumerate() {
                acc += p.weight;
                if u < acc {
                    return i as ProfileIndex;
                }
            }
            // rounding left u above the total; take the last weighted profile
            cfg.profiles.iter().rposition(|p| p.weight > 0.0).unwrap_or(0) as ProfileIndex
        })
        .collect()
}

struct Simulation<'a> {
    opts: &'a RunOptions,
    horizon: SimTime,
    snapshot_period: Option<f64>,
    policy: PlacementPolicy,
    aps: Vec<AccessPoint>,
    profiles: Vec<&'a TaskTypeProfile>,
    demand: Vec<Utilization>,
    device_profile: Vec<ProfileIndex>,
    streams: Vec<DeviceStreams>,
    mobility: Mobility,
    network: NetworkState,
    dcs: Datacenters,
    registry: Registry,
    metrics: MetricsCollector,
    ids: TaskIds,
    records: Vec<TaskRecord>,
    trace: Vec<TraceEntry>,
    census: Vec<TaskProperties>,
}

impl<'a> Simulation<'a> {
    fn build(
        cfg: &'a ScenarioConfig,
        engine: Engine,
        seed: u64,
        opts: &'a RunOptions,
        kernel: &mut Kernel,
    ) -> Result<Self, SimError> {
        let horizon = cfg.horizon();
        let aps = cfg.access_points();
        let profiles: Vec<_> = cfg.profiles.iter().map(|p| &p.profile).collect();
        let device_profile = assign_profiles(cfg, seed);
        let mut streams: Vec<_> = (0..cfg.device_count).map(|d| DeviceStreams::new(seed, DeviceId(d as u32))).collect();
        let mut ids = TaskIds::default();

        let mobility = match engine {
            Engine::Baseline => {
                let m = PrecomputedMobility::build(&aps, horizon, streams.iter_mut().map(|s| &mut s.mobility))?;
                for (d, s) in streams.iter_mut().enumerate() {
                    let pi = device_profile[d];
                    let tasks =
                        generate_all(DeviceId(d as u32), pi, profiles[pi as usize], horizon, &mut s.load, &mut ids);
                    for task in tasks {
                        kernel.schedule(task.arrival, EventKind::TaskArrival(task))?;
                    }
                }
                Mobility::Precomputed(m)
            }
            Engine::Renovated => {
                let m = MobilityState::init_event_driven(&aps, streams.iter_mut().map(|s| &mut s.mobility), kernel)?;
                for (d, s) in streams.iter_mut().enumerate() {
                    let pi = device_profile[d];
                    schedule_lazy(
                        DeviceId(d as u32),
                        pi,
                        profiles[pi as usize],
                        horizon,
                        &mut s.load,
                        &mut ids,
                        kernel,
                    )?;
                }
                if opts.snapshots && cfg.snapshot_period_s.is_some() {
                    kernel.schedule(SimTime::ZERO, EventKind::LocationSnapshot)?;
                }
                Mobility::EventDriven(m)
            }
        };

        let net = &cfg.network;
        Ok(Self {
            opts,
            horizon,
            snapshot_period: cfg.snapshot_period_s,
            policy: cfg.policy,
            demand: profiles.iter().map(|p| Utilization::from_pct(p.vm_utilization_pct)).collect(),
            profiles,
            device_profile,
            streams,
            mobility,
            network: NetworkState::new(
                net.wan_bandwidth_mbps,
                net.wan_propagation_s,
                net.wlan_device_capacity,
                net.wan_transfer_capacity,
            ),
            dcs: Datacenters::new(aps.len(), cfg.edge.vms_per_ap, cfg.edge.mips, cfg.cloud.vm_count, cfg.cloud.mips),
            aps,
            registry: Registry::new(opts.registry.unwrap_or(engine.default_registry())),
            metrics: MetricsCollector::default(),
            ids,
            records: Vec::new(),
            trace: Vec::new(),
            census: Vec::new(),
        })
    }

    fn handle(&mut self, kernel: &mut Kernel, event: Event, sink: &mut dyn SnapshotSink) -> Result<(), SimError> {
        if self.opts.trace {
            self.trace.push(TraceEntry { tag: event.kind.tag(), time: event.time.secs(), seq: event.seq });
        }
        match event.kind {
            EventKind::DeviceMove(device) => {
                let Mobility::EventDriven(state) = &mut self.mobility else {
                    return Err(SimError::Invariant("movement event in a precomputed-mobility run".into()));
                };
                state.apply_movement(&self.aps, device, &mut self.streams[device.index()].mobility, kernel)?;
            }
            EventKind::ActivePeriodStart(device) => {
                let pi = self.device_profile[device.index()];
                schedule_lazy(
                    device,
                    pi,
                    self.profiles[pi as usize],
                    self.horizon,
                    &mut self.streams[device.index()].load,
                    &mut self.ids,
                    kernel,
                )?;
            }
            EventKind::TaskArrival(task) => self.on_arrival(kernel, task)?,
            EventKind::UploadDone(id) => self.on_upload_done(kernel, id)?,
            EventKind::ExecDone(id) => self.on_exec_done(kernel, id)?,
            EventKind::DownloadDone(id) => self.on_download_done(kernel, id)?,
            EventKind::LocationSnapshot => {
                if let Mobility::EventDriven(state) = &self.mobility {
                    location_snapshot(state.counts(), kernel.now(), sink)?;
                }
                if let Some(period) = self.snapshot_period {
                    let next = kernel.now() + period;
                    if next < self.horizon {
                        kernel.schedule(next, EventKind::LocationSnapshot)?;
                    }
                }
            }
        }
        if self.opts.check_invariants {
            self.check_invariants(kernel.now())?;
        }
        Ok(())
    }

    fn record_mut(&mut self, id: TaskId) -> Result<&mut TaskRecord, SimError> {
        self.registry
            .lookup_mut(id)
            .ok_or_else(|| SimError::Invariant(format!("lifecycle event for unknown task {id}")))
    }

    /// Hands a terminal record to the metrics and releases it.
    fn terminate(&mut self, id: TaskId, status: TaskStatus, now: SimTime) -> Result<(), SimError> {
        let keep = self.opts.keep_records;
        let record = self
            .registry
            .lookup_mut(id)
            .ok_or_else(|| SimError::Invariant(format!("terminating unknown task {id}")))?;
        record.finish(status, now);
        self.metrics.record(record);
        if keep {
            let copy = record.clone();
            self.records.push(copy);
        }
        self.registry.retire(id)?;
        Ok(())
    }

    fn on_arrival(&mut self, kernel: &mut Kernel, task: TaskProperties) -> Result<(), SimError> {
        let now = kernel.now();
        if self.opts.census {
            self.census.push(task);
        }
        let origin = self.mobility.location_of(task.device, now);
        self.registry.register(TaskRecord::submitted(task, origin, now))?;

        let profile = self.profiles[task.profile as usize];
        let target =
            select_target(&self.policy, profile, origin, &self.dcs, &mut self.streams[task.device.index()].placement);
        let record = self.record_mut(task.id)?;
        record.target = Some(target.vm);
        record.uses_wan = target.uses_wan;

        let devices = self.mobility.device_count_at(origin, now)?;
        let bandwidth = self.aps[origin.index()].wlan_bandwidth_mbps;
        let Ok(mut delay) = self.network.wlan_delay(bandwidth, devices, profile.upload_bytes) else {
            return self.terminate(task.id, TaskStatus::FailedNetwork, now);
        };
        if target.uses_wan {
            let Ok(wan) = self.network.wan_delay(profile.upload_bytes) else {
                return self.terminate(task.id, TaskStatus::FailedNetwork, now);
            };
            self.network.start_wan_transfer();
            delay += wan;
        }
        kernel.schedule_after(delay, EventKind::UploadDone(task.id))?;
        Ok(())
    }

    fn on_upload_done(&mut self, kernel: &mut Kernel, id: TaskId) -> Result<(), SimError> {
        let now = kernel.now();
        let record = self.record_mut(id)?;
        record.upload_done_at = Some(now);
        let (uses_wan, vm, pi) =
            (record.uses_wan, record.target.expect("target set on arrival"), record.properties.profile);
        if uses_wan {
            self.network.finish_wan_transfer();
        }
        if !self.dcs.try_allocate(vm, self.demand[pi as usize]) {
            return self.terminate(id, TaskStatus::FailedVmCapacity, now);
        }
        let exec = execution_time(self.profiles[pi as usize].length_mi, self.dcs.vm(vm));
        kernel.schedule_after(exec, EventKind::ExecDone(id))?;
        Ok(())
    }

    fn on_exec_done(&mut self, kernel: &mut Kernel, id: TaskId) -> Result<(), SimError> {
        let now = kernel.now();
        let record = self.record_mut(id)?;
        record.exec_done_at = Some(now);
        let vm = record.target.expect("target set on arrival");
        let pi = record.properties.profile;
        let device = record.properties.device;
        let uses_wan = record.uses_wan;
        self.dcs.release(vm, self.demand[pi as usize]);

        let current = self.mobility.location_of(device, now);
        let record = self.record_mut(id)?;
        let ap = match deliver_result(record, current) {
            Delivery::FailedMobility => return self.terminate(id, TaskStatus::FailedMobility, now),
            Delivery::Via(ap) => ap,
        };
        let profile = self.profiles[pi as usize];
        let devices = self.mobility.device_count_at(ap, now)?;
        let bandwidth = self.aps[ap.index()].wlan_bandwidth_mbps;
        let Ok(mut delay) = self.network.wlan_delay(bandwidth, devices, profile.download_bytes) else {
            return self.terminate(id, TaskStatus::FailedNetwork, now);
        };
        if uses_wan {
            let Ok(wan) = self.network.wan_delay(profile.download_bytes) else {
                return self.terminate(id, TaskStatus::FailedNetwork, now);
            };
            self.network.start_wan_transfer();
            delay += wan;
        }
        kernel.schedule_after(delay, EventKind::DownloadDone(id))?;
        Ok(())
    }

    fn on_download_done(&mut self, kernel: &mut Kernel, id: TaskId) -> Result<(), SimError> {
        let now = kernel.now();
        if self.record_mut(id)?.uses_wan {
            self.network.finish_wan_transfer();
        }
        self.terminate(id, TaskStatus::Completed, now)
    }

    fn check_invariants(&self, now: SimTime) -> Result<(), SimError> {
        let devices = self.device_profile.len() as u64;
        let total: u64 = match &self.mobility {
            Mobility::EventDriven(state) => {
                state.check_consistency()?;
                state.counts().iter().map(|&c| c as u64).sum()
            }
            Mobility::Precomputed(m) => (0..self.aps.len())
                .map(|l| m.device_count_at(ApId(l as u32), now).map(u64::from))
                .sum::<Result<u64, _>>()?,
        };
        if total != devices {
            return Err(SimError::Invariant(format!("{total} devices counted, {devices} exist")));
        }
        if let Some(vm) = self.dcs.vms().iter().find(|v| v.utilization > Utilization::FULL) {
            return Err(SimError::Invariant(format!("VM {} over capacity", vm.id)));
        }
        Ok(())
    }

    /// The baseline logs locations from its trajectories once the run is over.
    fn backfill_snapshots(&self, sink: &mut dyn SnapshotSink) -> Result<(), SimError> {
        let (Mobility::Precomputed(m), Some(period)) = (&self.mobility, self.snapshot_period) else {
            return Ok(());
        };
        let mut t = SimTime::ZERO;
        let mut counts = vec![0u32; self.aps.len()];
        while t < self.horizon {
            counts.iter_mut().for_each(|c| *c = 0);
            for d in 0..m.device_count() {
                counts[m.location_of(DeviceId(d as u32), t).index()] += 1;
            }
            location_snapshot(&counts, t, sink)?;
            t = t + period;
        }
        Ok(())
    }
}

/// Runs one simulation, writing location snapshots (if enabled) to `sink`.
///
/// The reported wall time covers model setup and the dispatch loop.
pub fn run_scenario_with_sink(
    cfg: &ScenarioConfig,
    engine: Engine,
    seed: u64,
    opts: &RunOptions,
    sink: &mut dyn SnapshotSink,
) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut kernel = Kernel::new();
    let mut sim = Simulation::build(cfg, engine, seed, opts, &mut kernel)?;
    let horizon = sim.horizon;
    let mut stats = kernel.run(horizon, |k, ev| sim.handle(k, ev, sink))?;
    stats.wall_time = started.elapsed();

    if opts.snapshots {
        sim.backfill_snapshots(sink)?;
    }
    debug_assert_eq!(kernel.queue().scheduled_count(), kernel.dispatched_count() + kernel.remaining_count());
    Ok(RunOutput {
        engine,
        seed,
        summary: sim.metrics.summarize(&stats),
        stats,
        registry: sim.registry.stats(),
        events_scheduled: kernel.queue().scheduled_count(),
        events_remaining: kernel.remaining_count(),
        final_vm_utilization: sim.dcs.total_utilization(),
        final_wan_transfers: sim.network.active_wan_transfers(),
        records: sim.records,
        trace: sim.trace,
        census: sim.census,
        snapshots: Vec::new(),
    })
}

/// Runs one simulation; snapshots, if enabled, land in `RunOutput::snapshots`.
pub fn run_scenario_opts(
    cfg: &ScenarioConfig,
    engine: Engine,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunOutput, SimError> {
    let mut rows = Vec::new();
    let mut out = run_scenario_with_sink(cfg, engine, seed, opts, &mut rows)?;
    out.snapshots = rows;
    Ok(out)
}

pub fn run_scenario(cfg: &ScenarioConfig, engine: Engine, seed: u64) -> Result<(MetricsSummary, RunStats), SimError> {
    let out = run_scenario_opts(cfg, engine, seed, &RunOptions::default())?;
    Ok((out.summary, out.stats))
}
