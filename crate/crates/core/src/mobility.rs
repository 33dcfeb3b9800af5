//! Nomadic mobility.
//!
//! A device dwells at an access point for an exponentially distributed
//! time whose mean is that point's attractiveness, then jumps to a
//! different access point chosen uniformly. Two strategies share the
//! model: [`PrecomputedMobility`] builds every device's full trajectory
//! before the run, [`MobilityState`] moves devices on `DeviceMove` events
//! and keeps a per-access-point device count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{EventKind, Kernel, KernelError};
use crate::rng::Uniform;
use crate::types::{ApId, DeviceId, SimTime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MobilityError {
    #[error("mobility needs at least 2 access points, got {locations}")]
    DegenerateTopology { locations: usize },
    #[error("unknown access point {loc} (have {locations})")]
    UnknownLocation { loc: ApId, locations: usize },
    #[error("inconsistent mobility state: {0}")]
    InconsistentState(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    pub id: ApId,
    pub x_m: f64,
    pub y_m: f64,
    /// Mean dwell time in seconds.
    pub attractiveness_s: f64,
    pub wlan_bandwidth_mbps: f64,
}

/// Inverse-transform exponential draw with the given mean.
#[inline]
pub fn sample_exponential(mean: f64, u: f64) -> f64 {
    debug_assert!(mean > 0.0 && (0.0..1.0).contains(&u));
    -mean * (-u).ln_1p()
}

#[inline]
pub fn sample_dwell(attractiveness_s: f64, u: f64) -> f64 {
    sample_exponential(attractiveness_s, u)
}

/// Uniform over all `locations` access points.
pub fn initial_placement(locations: usize, u: f64) -> ApId {
    let k = ((u * locations as f64) as usize).min(locations - 1);
    ApId(k as u32)
}

/// Uniform over every access point except `current`.
pub fn pick_destination(current: ApId, locations: usize, u: f64) -> Result<ApId, MobilityError> {
    if locations < 2 {
        return Err(MobilityError::DegenerateTopology { locations });
    }
    let k = ((u * (locations - 1) as f64) as usize).min(locations - 2);
    let k = if k >= current.index() { k + 1 } else { k };
    Ok(ApId(k as u32))
}

/// Streams consumed by one device's mobility, in a fixed order:
/// placement then one destination per move from `destination`, one dwell
/// per stay from `dwell`.
#[derive(Debug, Clone)]
pub struct MobilityStreams<U> {
    pub dwell: U,
    pub destination: U,
}

/// Movement times mapped to the access point entered at that time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    moves: BTreeMap<SimTime, ApId>,
}

impl Trajectory {
    /// Location at `t`: the value at the greatest key not after `t`.
    pub fn location_at(&self, t: SimTime) -> ApId {
        *self.moves.range(..=t).next_back().expect("trajectory always holds key 0").1
    }

    /// Number of movements, not counting the initial placement.
    pub fn movement_count(&self) -> usize {
        self.moves.len() - 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (SimTime, ApId)> + '_ {
        self.moves.iter().map(|(t, l)| (*t, *l))
    }

    pub fn last_key(&self) -> SimTime {
        *self.moves.keys().next_back().expect("non-empty")
    }
}

/// Builds one device's trajectory up to and including the first move
/// past `horizon`.
pub fn precompute_trajectory<U: Uniform>(
    aps: &[AccessPoint],
    horizon: SimTime,
    streams: &mut MobilityStreams<U>,
) -> Result<Trajectory, MobilityError> {
    let locations = aps.len();
    if locations < 2 {
        return Err(MobilityError::DegenerateTopology { locations });
    }
    let mut moves = BTreeMap::new();
    let mut loc = initial_placement(locations, streams.destination.next_uniform());
    let mut t = SimTime::ZERO;
    moves.insert(t, loc);
    while t <= horizon {
        let dwell = sample_dwell(aps[loc.index()].attractiveness_s, streams.dwell.next_uniform());
        t = t + dwell;
        loc = pick_destination(loc, locations, streams.destination.next_uniform())?;
        moves.insert(t, loc);
    }
    Ok(Trajectory { moves })
}

/// Baseline strategy: all trajectories built up front, locations found
/// by searching them.
///
/// Lookups are clamped to the horizon: the population stops moving when
/// the scenario ends, while in-flight tasks drain.
#[derive(Debug, Clone)]
pub struct PrecomputedMobility {
    trajectories: Vec<Trajectory>,
    locations: usize,
    horizon: SimTime,
}

impl PrecomputedMobility {
    pub fn build<'a, U: Uniform + 'a>(
        aps: &[AccessPoint],
        horizon: SimTime,
        streams: impl IntoIterator<Item = &'a mut MobilityStreams<U>>,
    ) -> Result<Self, MobilityError> {
        let trajectories =
            streams.into_iter().map(|s| precompute_trajectory(aps, horizon, s)).collect::<Result<Vec<_>, _>>()?;
        Ok(Self { trajectories, locations: aps.len(), horizon })
    }

    pub fn trajectory(&self, device: DeviceId) -> &Trajectory {
        &self.trajectories[device.index()]
    }

    pub fn device_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn location_of(&self, device: DeviceId, now: SimTime) -> ApId {
        self.trajectories[device.index()].location_at(now.min(self.horizon))
    }

    /// Scans every device's trajectory.
    pub fn device_count_at(&self, loc: ApId, now: SimTime) -> Result<u32, MobilityError> {
        if loc.index() >= self.locations {
            return Err(MobilityError::UnknownLocation { loc, locations: self.locations });
        }
        let t = now.min(self.horizon);
        Ok(self.trajectories.iter().filter(|tr| tr.location_at(t) == loc).count() as u32)
    }
}

/// Renovated strategy: current location per device and device count per
/// access point, updated only by movement events.
#[derive(Debug, Clone, PartialEq)]
pub struct MobilityState {
    loc_of: Vec<ApId>,
    count_at: Vec<u32>,
    next_move_at: Vec<SimTime>,
}

impl MobilityState {
    /// Places every device and schedules its first `DeviceMove`.
    pub fn init_event_driven<'a, U: Uniform + 'a>(
        aps: &[AccessPoint],
        streams: impl IntoIterator<Item = &'a mut MobilityStreams<U>>,
        kernel: &mut Kernel,
    ) -> Result<Self, MobilityError> {
        let locations = aps.len();
        if locations < 2 {
            return Err(MobilityError::DegenerateTopology { locations });
        }
        let mut state = MobilityState { loc_of: Vec::new(), count_at: vec![0; locations], next_move_at: Vec::new() };
        for (d, s) in streams.into_iter().enumerate() {
            let loc = initial_placement(locations, s.destination.next_uniform());
            state.loc_of.push(loc);
            state.count_at[loc.index()] += 1;
            let dwell = sample_dwell(aps[loc.index()].attractiveness_s, s.dwell.next_uniform());
            let at = kernel.now() + dwell;
            state.next_move_at.push(at);
            kernel.schedule(at, EventKind::DeviceMove(DeviceId(d as u32)))?;
        }
        Ok(state)
    }

    /// Moves `device` to a new access point and schedules its next move.
    pub fn apply_movement<U: Uniform>(
        &mut self,
        aps: &[AccessPoint],
        device: DeviceId,
        streams: &mut MobilityStreams<U>,
        kernel: &mut Kernel,
    ) -> Result<ApId, MobilityError> {
        let d = device.index();
        let now = kernel.now();
        if self.next_move_at[d] != now {
            return Err(MobilityError::InconsistentState(format!(
                "device {device} moved at {now}, expected {}",
                self.next_move_at[d]
            )));
        }
        let old = self.loc_of[d];
        let new = pick_destination(old, aps.len(), streams.destination.next_uniform())?;
        let slot = &mut self.count_at[old.index()];
        *slot = slot
            .checked_sub(1)
            .ok_or_else(|| MobilityError::InconsistentState(format!("device count underflow at {old}")))?;
        self.count_at[new.index()] += 1;
        self.loc_of[d] = new;
        let dwell = sample_dwell(aps[new.index()].attractiveness_s, streams.dwell.next_uniform());
        let at = now + dwell;
        self.next_move_at[d] = at;
        kernel.schedule(at, EventKind::DeviceMove(device))?;
        Ok(new)
    }

    #[inline]
    pub fn location_of(&self, device: DeviceId) -> ApId {
        self.loc_of[device.index()]
    }

    pub fn device_count_at(&self, loc: ApId) -> Result<u32, MobilityError> {
        self.count_at
            .get(loc.index())
            .copied()
            .ok_or(MobilityError::UnknownLocation { loc, locations: self.count_at.len() })
    }

    pub fn counts(&self) -> &[u32] {
        &self.count_at
    }

    pub fn locations(&self) -> &[ApId] {
        &self.loc_of
    }

    pub fn next_move_at(&self, device: DeviceId) -> SimTime {
        self.next_move_at[device.index()]
    }

    pub fn device_count(&self) -> usize {
        self.loc_of.len()
    }

    /// Recounts devices per access point and compares with the counters.
    pub fn check_consistency(&self) -> Result<(), MobilityError> {
        let mut recount = vec![0u32; self.count_at.len()];
        for loc in &self.loc_of {
            recount[loc.index()] += 1;
        }
        if recount != self.count_at {
            return Err(MobilityError::InconsistentState(format!(
                "counters {:?} disagree with recount {:?}",
                self.count_at, recount
            )));
        }
        Ok(())
    }
}
