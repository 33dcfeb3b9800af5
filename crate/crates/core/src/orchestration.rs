//! Edge and cloud compute tiers, placement policies and task records.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::load::{TaskProperties, TaskTypeProfile};
use crate::rng::Uniform;
use crate::types::{ApId, SimTime, VmId};

/// VM utilization in hundredths of a percent. Integer so that admissions
/// and releases cancel exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Utilization(pub u32);

impl Utilization {
    pub const FULL: Utilization = Utilization(10_000);

    pub fn from_pct(pct: f64) -> Self {
        Utilization((pct * 100.0).round() as u32)
    }

    pub fn pct(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    Edge(ApId),
    Cloud,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmState {
    pub id: VmId,
    pub tier: Tier,
    pub mips: f64,
    pub utilization: Utilization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlacementPolicy {
    SingleTier,
    TwoTier,
    TwoTierWithOrchestrator { edge_utilization_threshold_pct: f64 },
}

impl PlacementPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            PlacementPolicy::SingleTier => "single_tier",
            PlacementPolicy::TwoTier => "two_tier",
            PlacementPolicy::TwoTierWithOrchestrator { .. } => "two_tier_with_orchestrator",
        }
    }
}

impl fmt::Display for PlacementPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TaskStatus {
    InFlight,
    Completed,
    FailedNetwork,
    FailedMobility,
    FailedVmCapacity,
}

impl TaskStatus {
    pub fn is_terminal(self) -> bool {
        self != TaskStatus::InFlight
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub properties: TaskProperties,
    pub target: Option<VmId>,
    pub uses_wan: bool,
    pub origin_loc: ApId,
    pub submitted_at: Option<SimTime>,
    pub upload_done_at: Option<SimTime>,
    pub exec_done_at: Option<SimTime>,
    pub finished_at: Option<SimTime>,
    pub status: TaskStatus,
}

impl TaskRecord {
    pub fn submitted(properties: TaskProperties, origin_loc: ApId, now: SimTime) -> Self {
        Self {
            properties,
            target: None,
            uses_wan: false,
            origin_loc,
            submitted_at: Some(now),
            upload_done_at: None,
            exec_done_at: None,
            finished_at: None,
            status: TaskStatus::InFlight,
        }
    }

    pub fn finish(&mut self, status: TaskStatus, now: SimTime) {
        debug_assert!(status.is_terminal() && !self.status.is_terminal());
        self.status = status;
        self.finished_at = Some(now);
    }

    pub fn service_time(&self) -> Option<f64> {
        match (self.status, self.submitted_at, self.finished_at) {
            (TaskStatus::Completed, Some(s), Some(f)) => Some(f - s),
            _ => None,
        }
    }
}

/// Where a task goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub vm: VmId,
    pub uses_wan: bool,
}

/// All VMs of a scenario: `vms_per_ap` edge VMs at each access point, then
/// the cloud VMs.
#[derive(Debug, Clone)]
pub struct Datacenters {
    vms: Vec<VmState>,
    edge_per_ap: usize,
    cloud: Range<usize>,
}

impl Datacenters {
    pub fn new(access_points: usize, vms_per_ap: usize, edge_mips: f64, cloud_vms: usize, cloud_mips: f64) -> Self {
        let mut vms = Vec::with_capacity(access_points * vms_per_ap + cloud_vms);
        for ap in 0..access_points {
            for _ in 0..vms_per_ap {
                vms.push(VmState {
                    id: VmId(vms.len() as u32),
                    tier: Tier::Edge(ApId(ap as u32)),
                    mips: edge_mips,
                    utilization: Utilization::default(),
                });
            }
        }
        let start = vms.len();
        for _ in 0..cloud_vms {
            vms.push(VmState {
                id: VmId(vms.len() as u32),
                tier: Tier::Cloud,
                mips: cloud_mips,
                utilization: Utilization::default(),
            });
        }
        Self { cloud: start..vms.len(), vms, edge_per_ap: vms_per_ap }
    }

    pub fn vm(&self, id: VmId) -> &VmState {
        &self.vms[id.index()]
    }

    pub fn vms(&self) -> &[VmState] {
        &self.vms
    }

    pub fn edge_vms(&self, ap: ApId) -> &[VmState] {
        let start = ap.index() * self.edge_per_ap;
        &self.vms[start..start + self.edge_per_ap]
    }

    pub fn cloud_vms(&self) -> &[VmState] {
        &self.vms[self.cloud.clone()]
    }

    /// Sum of all VMs' utilization.
    pub fn total_utilization(&self) -> u64 {
        self.vms.iter().map(|v| v.utilization.0 as u64).sum()
    }

    /// Admits the task iff the VM stays at or below 100 %.
    pub fn try_allocate(&mut self, vm: VmId, demand: Utilization) -> bool {
        let state = &mut self.vms[vm.index()];
        let next = state.utilization.0 + demand.0;
        if next > Utilization::FULL.0 {
            return false;
        }
        state.utilization = Utilization(next);
        true
    }

    pub fn release(&mut self, vm: VmId, demand: Utilization) {
        let state = &mut self.vms[vm.index()];
        state.utilization =
            Utilization(state.utilization.0.checked_sub(demand.0).expect("released more utilization than admitted"));
    }
}

/// Lowest utilization, first id among ties.
fn least_utilized(vms: &[VmState]) -> Option<&VmState> {
    vms.iter().min_by_key(|v| (v.utilization, v.id))
}

/// Picks the VM a task is sent to.
///
/// `placement` is read only by [`PlacementPolicy::TwoTier`], exactly once
/// per task.
pub fn select_target<U: Uniform>(
    policy: &PlacementPolicy,
    profile: &TaskTypeProfile,
    device_loc: ApId,
    dcs: &Datacenters,
    placement: &mut U,
) -> Target {
    let edge = least_utilized(dcs.edge_vms(device_loc));
    let cloud = || {
        let vm = least_utilized(dcs.cloud_vms()).expect("cloud tier has no VMs");
        Target { vm: vm.id, uses_wan: true }
    };
    let to_edge = |vm: &VmState| Target { vm: vm.id, uses_wan: false };
    match policy {
        PlacementPolicy::SingleTier => to_edge(edge.expect("no edge VM at access point")),
        PlacementPolicy::TwoTier => {
            let u = placement.next_uniform();
            match edge {
                Some(vm) if u >= profile.cloud_probability => to_edge(vm),
                _ => cloud(),
            }
        }
        PlacementPolicy::TwoTierWithOrchestrator { edge_utilization_threshold_pct } => {
            let demand = Utilization::from_pct(profile.vm_utilization_pct);
            let threshold = Utilization::from_pct(*edge_utilization_threshold_pct);
            match edge {
                Some(vm) if vm.utilization.0 + demand.0 <= threshold.0 => to_edge(vm),
                _ => cloud(),
            }
        }
    }
}

/// Seconds to run `length_mi` million instructions on `vm`.
pub fn execution_time(length_mi: f64, vm: &VmState) -> f64 {
    length_mi / vm.mips
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    /// Send the result over the wireless hop of this access point.
    Via(ApId),
    FailedMobility,
}

/// Edge results must reach the device at the access point it submitted
/// from; cloud results follow the device to its current access point.
pub fn deliver_result(record: &TaskRecord, current_loc: ApId) -> Delivery {
    if record.uses_wan {
        Delivery::Via(current_loc)
    } else if current_loc == record.origin_loc {
        Delivery::Via(record.origin_loc)
    } else {
        Delivery::FailedMobility
    }
}
