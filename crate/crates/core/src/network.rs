//! Fair-share transfer delays for the wireless hop (device to access
//! point) and the wide-area hop (edge to cloud).
//!
//! Delays are computed once from the state at transfer start.

use serde::Serialize;

/// Why a transfer could not be carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NetworkFailure {
    WlanCongestion,
    WanCongestion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub wan_bandwidth_mbps: f64,
    pub wan_propagation_s: f64,
    /// `None` disables the cutoff.
    pub wlan_device_capacity: Option<u32>,
    pub wan_transfer_capacity: Option<u32>,
    active_wan_transfers: u32,
}

#[inline]
fn transfer_secs(bytes: u64, mbps: f64) -> f64 {
    8.0 * bytes as f64 / (mbps * 1e6)
}

impl NetworkState {
    pub fn new(
        wan_bandwidth_mbps: f64,
        wan_propagation_s: f64,
        wlan_device_capacity: Option<u32>,
        wan_transfer_capacity: Option<u32>,
    ) -> Self {
        Self {
            wan_bandwidth_mbps,
            wan_propagation_s,
            wlan_device_capacity,
            wan_transfer_capacity,
            active_wan_transfers: 0,
        }
    }

    /// Delay of `bytes` over an access point with `nominal_mbps` shared by
    /// `devices_at_ap` devices (the sender included).
    pub fn wlan_delay(&self, nominal_mbps: f64, devices_at_ap: u32, bytes: u64) -> Result<f64, NetworkFailure> {
        let n = devices_at_ap.max(1);
        if self.wlan_device_capacity.is_some_and(|cap| n > cap) {
            return Err(NetworkFailure::WlanCongestion);
        }
        Ok(transfer_secs(bytes, nominal_mbps / n as f64))
    }

    /// Delay of a new WAN transfer given the transfers already active.
    pub fn wan_delay(&self, bytes: u64) -> Result<f64, NetworkFailure> {
        let m = self.active_wan_transfers + 1;
        if self.wan_transfer_capacity.is_some_and(|cap| m > cap) {
            return Err(NetworkFailure::WanCongestion);
        }
        Ok(self.wan_propagation_s + transfer_secs(bytes, self.wan_bandwidth_mbps / m as f64))
    }

    pub fn start_wan_transfer(&mut self) {
        self.active_wan_transfers += 1;
    }

    pub fn finish_wan_transfer(&mut self) {
        self.active_wan_transfers =
            self.active_wan_transfers.checked_sub(1).expect("WAN transfer finished without a matching start");
    }

    pub fn active_wan_transfers(&self) -> u32 {
        self.active_wan_transfers
    }
}
