//! Scenario files: JSON in, validated [`ScenarioConfig`] out.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::load::TaskTypeProfile;
use crate::mobility::AccessPoint;
use crate::orchestration::PlacementPolicy;
use crate::types::{ApId, SimTime};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario field `{field}`: {reason}")]
    Validation { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccessPointConfig {
    /// Defaults to the position in the list.
    #[serde(default)]
    pub id: Option<u32>,
    #[serde(default)]
    pub x_m: f64,
    #[serde(default)]
    pub y_m: f64,
    pub attractiveness_s: f64,
    pub wlan_bandwidth_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub vms_per_ap: usize,
    pub mips: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudConfig {
    pub vm_count: usize,
    pub mips: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedProfile {
    pub weight: f64,
    #[serde(flatten)]
    pub profile: TaskTypeProfile,
}

fn default_wan_bandwidth() -> f64 {
    200.0
}
fn default_wan_propagation() -> f64 {
    0.1
}
fn default_wlan_capacity() -> Option<u32> {
    Some(100)
}
fn default_wan_capacity() -> Option<u32> {
    Some(50)
}

/// Capacities set to `null` disable the congestion cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    #[serde(default = "default_wan_bandwidth")]
    pub wan_bandwidth_mbps: f64,
    #[serde(default = "default_wan_propagation")]
    pub wan_propagation_s: f64,
    #[serde(default = "default_wlan_capacity")]
    pub wlan_device_capacity: Option<u32>,
    #[serde(default = "default_wan_capacity")]
    pub wan_transfer_capacity: Option<u32>,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            wan_bandwidth_mbps: default_wan_bandwidth(),
            wan_propagation_s: default_wan_propagation(),
            wlan_device_capacity: default_wlan_capacity(),
            wan_transfer_capacity: default_wan_capacity(),
        }
    }
}

fn default_policy() -> PlacementPolicy {
    PlacementPolicy::SingleTier
}
fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub duration_min: f64,
    pub device_count: usize,
    #[serde(default = "default_policy")]
    pub policy: PlacementPolicy,
    pub access_points: Vec<AccessPointConfig>,
    pub edge: EdgeConfig,
    pub cloud: CloudConfig,
    pub profiles: Vec<WeightedProfile>,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub snapshot_period_s: Option<f64>,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn horizon(&self) -> SimTime {
        SimTime::from_minutes(self.duration_min)
    }

    pub fn access_points(&self) -> Vec<AccessPoint> {
        self.access_points
            .iter()
            .enumerate()
            .map(|(i, ap)| AccessPoint {
                id: ApId(i as u32),
                x_m: ap.x_m,
                y_m: ap.y_m,
                attractiveness_s: ap.attractiveness_s,
                wlan_bandwidth_mbps: ap.wlan_bandwidth_mbps,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.duration_min.is_finite() && self.duration_min > 0.0) {
            return Err(invalid("duration_min", "must be positive"));
        }
        if self.device_count < 1 {
            return Err(invalid("device_count", "must be at least 1"));
        }
        if self.access_points.len() < 2 {
            return Err(invalid("access_points", "need at least 2 access points"));
        }
        for (i, ap) in self.access_points.iter().enumerate() {
            if ap.id.is_some_and(|id| id as usize != i) {
                return Err(invalid(format!("access_points[{i}].id"), "ids must be 0..L-1 in order"));
            }
            if !(ap.attractiveness_s > 0.0 && ap.attractiveness_s.is_finite()) {
                return Err(invalid(format!("access_points[{i}].attractiveness_s"), "must be positive"));
            }
            if !(ap.wlan_bandwidth_mbps > 0.0 && ap.wlan_bandwidth_mbps.is_finite()) {
                return Err(invalid(format!("access_points[{i}].wlan_bandwidth_mbps"), "must be positive"));
            }
        }
        if self.edge.vms_per_ap < 1 {
            return Err(invalid("edge.vms_per_ap", "must be at least 1"));
        }
        if !(self.edge.mips > 0.0) {
            return Err(invalid("edge.mips", "must be positive"));
        }
        if self.cloud.vm_count < 1 {
            return Err(invalid("cloud.vm_count", "must be at least 1"));
        }
        if !(self.cloud.mips > 0.0) {
            return Err(invalid("cloud.mips", "must be positive"));
        }
        if let PlacementPolicy::TwoTierWithOrchestrator { edge_utilization_threshold_pct: t } = self.policy {
            if !(t > 0.0 && t <= 100.0) {
                return Err(invalid("policy.edge_utilization_threshold_pct", "must be in (0, 100]"));
            }
        }
        if self.profiles.is_empty() {
            return Err(invalid("profiles", "need at least one profile"));
        }
        if self.profiles.len() > u16::MAX as usize {
            return Err(invalid("profiles", "too many profiles"));
        }
        for (i, wp) in self.profiles.iter().enumerate() {
            let p = &wp.profile;
            let field = |name: &str| format!("profiles[{i}].{name}");
            if !(wp.weight >= 0.0) {
                return Err(invalid(field("weight"), "must be non-negative"));
            }
            if !(p.interarrival_mean_s > 0.0) {
                return Err(invalid(field("interarrival_mean_s"), "must be positive"));
            }
            if !(p.active_s > 0.0) {
                return Err(invalid(field("active_s"), "must be positive"));
            }
            if !(p.idle_s >= 0.0) {
                return Err(invalid(field("idle_s"), "must be non-negative"));
            }
            if p.upload_bytes == 0 {
                return Err(invalid(field("upload_bytes"), "must be positive"));
            }
            if p.download_bytes == 0 {
                return Err(invalid(field("download_bytes"), "must be positive"));
            }
            if !(p.length_mi > 0.0) {
                return Err(invalid(field("length_mi"), "must be positive"));
            }
            if !(p.vm_utilization_pct > 0.0 && p.vm_utilization_pct <= 100.0) {
                return Err(invalid(field("vm_utilization_pct"), "must be in (0, 100]"));
            }
            if !(0.0..=1.0).contains(&p.cloud_probability) {
                return Err(invalid(field("cloud_probability"), "must be in [0, 1]"));
            }
        }
        let total: f64 = self.profiles.iter().map(|p| p.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid("profiles.weights", format!("weights sum to {total}, expected 1")));
        }
        let net = &self.network;
        if !(net.wan_bandwidth_mbps > 0.0) {
            return Err(invalid("network.wan_bandwidth_mbps", "must be positive"));
        }
        if !(net.wan_propagation_s >= 0.0) {
            return Err(invalid("network.wan_propagation_s", "must be non-negative"));
        }
        if net.wlan_device_capacity == Some(0) {
            return Err(invalid("network.wlan_device_capacity", "must be positive or null"));
        }
        if net.wan_transfer_capacity == Some(0) {
            return Err(invalid("network.wan_transfer_capacity", "must be positive or null"));
        }
        if let Some(p) = self.snapshot_period_s {
            if !(p > 0.0) {
                return Err(invalid("snapshot_period_s", "must be positive"));
            }
        }
        Ok(())
    }
}

pub fn parse_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    ScenarioConfig::from_json(&fs::read_to_string(path)?)
}
