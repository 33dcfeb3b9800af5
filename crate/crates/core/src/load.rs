//! Idle/active load model.
//!
//! Each device alternates fixed-length active and idle periods; inside an
//! active period its tasks arrive as a Poisson process. The eager
//! strategy ([`generate_all`]) materializes every task of the run before
//! the clock starts, the lazy one ([`schedule_lazy`]) generates one
//! active period at a time when its `ActivePeriodStart` event fires.

use serde::{Deserialize, Serialize};

use crate::kernel::{EventKind, Kernel, KernelError};
use crate::mobility::sample_exponential;
use crate::rng::Uniform;
use crate::types::{DeviceId, SimTime, TaskId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTypeProfile {
    pub name: String,
    pub interarrival_mean_s: f64,
    pub active_s: f64,
    pub idle_s: f64,
    pub upload_bytes: u64,
    pub download_bytes: u64,
    pub length_mi: f64,
    pub vm_utilization_pct: f64,
    pub cloud_probability: f64,
}

/// Index into the scenario's profile list.
pub type ProfileIndex = u16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskProperties {
    pub id: TaskId,
    pub device: DeviceId,
    pub profile: ProfileIndex,
    pub arrival: SimTime,
}

/// Hands out run-unique task ids.
#[derive(Debug, Default)]
pub struct TaskIds(u64);

impl TaskIds {
    pub fn next_id(&mut self) -> TaskId {
        let id = TaskId(self.0);
        self.0 += 1;
        id
    }

    pub fn issued(&self) -> u64 {
        self.0
    }
}

#[inline]
pub fn sample_interarrival(profile: &TaskTypeProfile, u: f64) -> f64 {
    sample_exponential(profile.interarrival_mean_s, u)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivePeriod {
    pub tasks: Vec<TaskProperties>,
    pub next_period_start: SimTime,
}

/// Tasks of the active period starting at `period_start`.
///
/// The first arrival lies one inter-arrival draw past the period start;
/// generation stops at the first arrival outside the active window or at
/// the horizon. The overshooting draw is consumed either way.
pub fn generate_active_period<U: Uniform>(
    device: DeviceId,
    profile_index: ProfileIndex,
    profile: &TaskTypeProfile,
    period_start: SimTime,
    horizon: SimTime,
    rng: &mut U,
    ids: &mut TaskIds,
) -> ActivePeriod {
    debug_assert!(period_start < horizon);
    let mut tasks = Vec::new();
    let mut t = period_start + sample_interarrival(profile, rng.next_uniform());
    while t - period_start < profile.active_s && t < horizon {
        tasks.push(TaskProperties { id: ids.next_id(), device, profile: profile_index, arrival: t });
        t = t + sample_interarrival(profile, rng.next_uniform());
    }
    ActivePeriod { tasks, next_period_start: period_start + (profile.active_s + profile.idle_s) }
}

/// Every task of one device over the whole run, in arrival order.
pub fn generate_all<U: Uniform>(
    device: DeviceId,
    profile_index: ProfileIndex,
    profile: &TaskTypeProfile,
    horizon: SimTime,
    rng: &mut U,
    ids: &mut TaskIds,
) -> Vec<TaskProperties> {
    let mut all = Vec::new();
    let mut start = SimTime::ZERO;
    while start < horizon {
        let period = generate_active_period(device, profile_index, profile, start, horizon, rng, ids);
        all.extend(period.tasks);
        start = period.next_period_start;
    }
    all
}

/// Enqueues the current period's arrivals and the next period's start.
/// The period starts at the kernel's current time. Returns the number of
/// tasks scheduled.
pub fn schedule_lazy<U: Uniform>(
    device: DeviceId,
    profile_index: ProfileIndex,
    profile: &TaskTypeProfile,
    horizon: SimTime,
    rng: &mut U,
    ids: &mut TaskIds,
    kernel: &mut Kernel,
) -> Result<usize, KernelError> {
    let period = generate_active_period(device, profile_index, profile, kernel.now(), horizon, rng, ids);
    let n = period.tasks.len();
    for task in period.tasks {
        kernel.schedule(task.arrival, EventKind::TaskArrival(task))?;
    }
    if period.next_period_start < horizon {
        kernel.schedule(period.next_period_start, EventKind::ActivePeriodStart(device))?;
    }
    Ok(n)
}
