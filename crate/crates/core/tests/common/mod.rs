#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use edgesim::kernel::{EventKind, Kernel, KernelError};
use edgesim::load::{generate_all, schedule_lazy, TaskIds, TaskTypeProfile};
use edgesim::mobility::{AccessPoint, MobilityError, MobilityState, PrecomputedMobility};
use edgesim::rng::{DeviceStream, DeviceStreams, Purpose};
use edgesim::scenario::{parse_scenario, ScenarioConfig};
use edgesim::types::{ApId, DeviceId, SimTime};

pub fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

pub fn desk() -> ScenarioConfig {
    parse_scenario(scenario_path("desk.json")).expect("desk scenario parses")
}

pub fn sweep_scenario() -> ScenarioConfig {
    parse_scenario(scenario_path("sweep.json")).expect("sweep scenario parses")
}

/// A randomly drawn topology, population and per-device load profile.
#[derive(Debug, Clone)]
pub struct Battery {
    pub seed: u64,
    pub aps: Vec<AccessPoint>,
    pub devices: usize,
    pub horizon: SimTime,
    pub profiles: Vec<TaskTypeProfile>,
}

pub fn battery(count: usize, master: u64) -> Vec<Battery> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..count)
        .map(|_| {
            let locations = rng.random_range(2..=14);
            let aps = (0..locations)
                .map(|i| AccessPoint {
                    id: ApId(i as u32),
                    x_m: 0.0,
                    y_m: 0.0,
                    attractiveness_s: rng.random_range(5.0..600.0),
                    wlan_bandwidth_mbps: 100.0,
                })
                .collect();
            let devices = rng.random_range(3..=200);
            let profiles = (0..devices)
                .map(|d| TaskTypeProfile {
                    name: format!("p{d}"),
                    interarrival_mean_s: rng.random_range(0.5..30.0),
                    active_s: rng.random_range(1.0..120.0),
                    idle_s: rng.random_range(0.0..120.0),
                    upload_bytes: 1000,
                    download_bytes: 1000,
                    length_mi: 100.0,
                    vm_utilization_pct: 10.0,
                    cloud_probability: 0.0,
                })
                .collect();
            Battery {
                seed: rng.random(),
                aps,
                devices,
                horizon: SimTime::from_secs(rng.random_range(1.0..=3600.0)),
                profiles,
            }
        })
        .collect()
}

/// Replays event-driven mobility and compares every device's location with
/// its precomputed trajectory after every dispatched movement. Returns the
/// number of movements compared.
pub fn check_mobility_equivalence(b: &Battery) -> Result<u64, String> {
    let mut eager: Vec<_> = (0..b.devices).map(|d| DeviceStreams::new(b.seed, DeviceId(d as u32))).collect();
    let pre = PrecomputedMobility::build(&b.aps, b.horizon, eager.iter_mut().map(|s| &mut s.mobility))
        .map_err(|e| e.to_string())?;

    let mut lazy: Vec<_> = (0..b.devices).map(|d| DeviceStreams::new(b.seed, DeviceId(d as u32))).collect();
    let mut kernel = Kernel::new();
    let mut state = MobilityState::init_event_driven(&b.aps, lazy.iter_mut().map(|s| &mut s.mobility), &mut kernel)
        .map_err(|e| e.to_string())?;

    let compare = |state: &MobilityState, now: SimTime| -> Result<(), MobilityError> {
        for d in 0..b.devices {
            let dev = DeviceId(d as u32);
            let (a, e) = (state.location_of(dev), pre.location_of(dev, now));
            if a != e {
                return Err(MobilityError::InconsistentState(format!(
                    "device {d} at {now}: event-driven {a}, precomputed {e}"
                )));
            }
        }
        Ok(())
    };
    compare(&state, SimTime::ZERO).map_err(|e| e.to_string())?;
    let mut moves = 0u64;
    kernel
        .run(b.horizon, |k, ev| {
            let EventKind::DeviceMove(dev) = ev.kind else {
                return Err(MobilityError::InconsistentState(format!("unexpected event {:?}", ev.kind)));
            };
            // the move must land exactly on a trajectory key
            let new = state.apply_movement(&b.aps, dev, &mut lazy[dev.index()].mobility, k)?;
            let expected = pre.trajectory(dev).iter().find(|(t, _)| *t == ev.time).map(|(_, l)| l);
            if expected != Some(new) {
                return Err(MobilityError::InconsistentState(format!(
                    "device {dev} moved to {new} at {}, trajectory says {expected:?}",
                    ev.time
                )));
            }
            moves += 1;
            compare(&state, k.now())
        })
        .map_err(|e| e.to_string())?;
    let expected_moves: u64 = (0..b.devices)
        .map(|d| {
            pre.trajectory(DeviceId(d as u32)).iter().filter(|(t, _)| *t > SimTime::ZERO && *t <= b.horizon).count()
                as u64
        })
        .sum();
    if moves != expected_moves {
        return Err(format!("{moves} movements replayed, trajectories hold {expected_moves}"));
    }
    Ok(moves)
}

/// `(device, arrival time bits)`.
pub type Arrival = (u32, u64);

/// Arrivals of both load strategies, sorted.
pub fn load_arrivals(b: &Battery) -> Result<(Vec<Arrival>, Vec<Arrival>), KernelError> {
    let mut ids = TaskIds::default();
    let mut eager = Vec::new();
    for d in 0..b.devices {
        let dev = DeviceId(d as u32);
        let mut rng = DeviceStream::new(b.seed, dev, Purpose::Load);
        for t in generate_all(dev, 0, &b.profiles[d], b.horizon, &mut rng, &mut ids) {
            eager.push((t.device.0, t.arrival.secs().to_bits()));
        }
    }

    let mut ids = TaskIds::default();
    let mut kernel = Kernel::new();
    let mut rngs: Vec<_> =
        (0..b.devices).map(|d| DeviceStream::new(b.seed, DeviceId(d as u32), Purpose::Load)).collect();
    for (d, rng) in rngs.iter_mut().enumerate() {
        schedule_lazy(DeviceId(d as u32), 0, &b.profiles[d], b.horizon, rng, &mut ids, &mut kernel)?;
    }
    let mut lazy = Vec::new();
    kernel.run(b.horizon, |k, ev| {
        match ev.kind {
            EventKind::ActivePeriodStart(dev) => {
                schedule_lazy(dev, 0, &b.profiles[dev.index()], b.horizon, &mut rngs[dev.index()], &mut ids, k)?;
            }
            EventKind::TaskArrival(t) => lazy.push((t.device.0, t.arrival.secs().to_bits())),
            other => panic!("unexpected event {other:?}"),
        }
        Ok::<_, KernelError>(())
    })?;
    eager.sort_unstable();
    lazy.sort_unstable();
    Ok((eager, lazy))
}

/// A small random full scenario, for engine-level properties.
pub fn random_config(rng: &mut ChaCha8Rng) -> ScenarioConfig {
    let locations = rng.random_range(2..=8);
    let aps: Vec<_> = (0..locations)
        .map(|_| json!({"attractiveness_s": rng.random_range(20.0..400.0), "wlan_bandwidth_mbps": rng.random_range(20.0..200.0)}))
        .collect();
    let n_profiles = rng.random_range(1..=3);
    let weights: Vec<f64> = {
        let raw: Vec<f64> = (0..n_profiles).map(|_| rng.random_range(0.1..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let mut w: Vec<f64> = raw.iter().map(|x| x / sum).collect();
        let head: f64 = w[..n_profiles - 1].iter().sum();
        w[n_profiles - 1] = 1.0 - head;
        w
    };
    let profiles: Vec<_> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| {
            json!({
                "weight": w, "name": format!("p{i}"),
                "interarrival_mean_s": rng.random_range(2.0..20.0),
                "active_s": rng.random_range(10.0..90.0),
                "idle_s": rng.random_range(0.0..90.0),
                "upload_bytes": rng.random_range(10_000u64..2_000_000),
                "download_bytes": rng.random_range(10_000u64..2_000_000),
                "length_mi": rng.random_range(500.0..20_000.0),
                "vm_utilization_pct": rng.random_range(5.0..60.0),
                "cloud_probability": rng.random_range(0.0..1.0),
            })
        })
        .collect();
    let policy = match rng.random_range(0..3) {
        0 => json!({"kind": "single_tier"}),
        1 => json!({"kind": "two_tier"}),
        _ => {
            json!({"kind": "two_tier_with_orchestrator", "edge_utilization_threshold_pct": rng.random_range(30.0..100.0)})
        }
    };
    let cfg = json!({
        "duration_min": rng.random_range(1.0..8.0),
        "device_count": rng.random_range(3..=80),
        "policy": policy,
        "access_points": aps,
        "edge": {"vms_per_ap": rng.random_range(1..=3), "mips": rng.random_range(1000.0..8000.0)},
        "cloud": {"vm_count": rng.random_range(1..=4), "mips": rng.random_range(5000.0..40000.0)},
        "network": {
            "wan_bandwidth_mbps": rng.random_range(20.0..500.0),
            "wan_propagation_s": rng.random_range(0.0..0.3),
            "wlan_device_capacity": rng.random_range(5..=60),
            "wan_transfer_capacity": rng.random_range(2..=40),
        },
        "profiles": profiles,
        "snapshot_period_s": 30.0,
        "master_seed": rng.random::<u32>(),
    });
    ScenarioConfig::from_json(&cfg.to_string()).expect("random scenario is valid")
}
