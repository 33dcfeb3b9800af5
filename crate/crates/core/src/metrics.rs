//! Per-run aggregates and location snapshots.

use std::io;

use serde::Serialize;

use crate::kernel::RunStats;
use crate::orchestration::{TaskRecord, TaskStatus};
use crate::types::{ApId, SimTime};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub tasks_generated: u64,
    pub completed: u64,
    pub failed_network: u64,
    pub failed_mobility: u64,
    pub failed_vm: u64,
    pub failed_rel_pct: f64,
    /// `None` iff no task completed.
    pub avg_service_time_s: Option<f64>,
    pub wall_time_s: f64,
    pub peak_queue_size: u64,
}

impl MetricsSummary {
    pub fn failed(&self) -> u64 {
        self.failed_network + self.failed_mobility + self.failed_vm
    }

    /// Copy with host timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time_s: 0.0, ..self.clone() }
    }

    /// Recomputes a summary from raw terminal records.
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TaskRecord>, stats: &RunStats) -> Self {
        let mut acc = MetricsCollector::default();
        for r in records {
            acc.record(r);
        }
        acc.summarize(stats)
    }
}

/// Accumulates terminal task records as the run hands them over.
#[derive(Debug, Clone, Default)]
pub struct MetricsCollector {
    completed: u64,
    failed_network: u64,
    failed_mobility: u64,
    failed_vm: u64,
    in_flight: u64,
    service_time_sum: f64,
}

impl MetricsCollector {
    pub fn record(&mut self, r: &TaskRecord) {
        match r.status {
            TaskStatus::Completed => {
                self.completed += 1;
                self.service_time_sum += r.service_time().expect("completed task has timestamps");
            }
            TaskStatus::FailedNetwork => self.failed_network += 1,
            TaskStatus::FailedMobility => self.failed_mobility += 1,
            TaskStatus::FailedVmCapacity => self.failed_vm += 1,
            TaskStatus::InFlight => self.in_flight += 1,
        }
    }

    pub fn summarize(&self, stats: &RunStats) -> MetricsSummary {
        let failed = self.failed_network + self.failed_mobility + self.failed_vm;
        let generated = self.completed + failed + self.in_flight;
        MetricsSummary {
            tasks_generated: generated,
            completed: self.completed,
            failed_network: self.failed_network,
            failed_mobility: self.failed_mobility,
            failed_vm: self.failed_vm,
            failed_rel_pct: if generated == 0 { 0.0 } else { failed as f64 / generated as f64 * 100.0 },
            avg_service_time_s: (self.completed > 0).then(|| self.service_time_sum / self.completed as f64),
            wall_time_s: stats.wall_time.as_secs_f64(),
            peak_queue_size: stats.peak_queue_size as u64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotRow {
    pub time_s: f64,
    pub ap: u32,
    pub devices: u32,
}

/// Destination of location snapshot rows.
pub trait SnapshotSink {
    fn record(&mut self, row: SnapshotRow) -> io::Result<()>;
}

impl SnapshotSink for Vec<SnapshotRow> {
    fn record(&mut self, row: SnapshotRow) -> io::Result<()> {
        self.push(row);
        Ok(())
    }
}

impl<W: io::Write> SnapshotSink for csv::Writer<W> {
    fn record(&mut self, row: SnapshotRow) -> io::Result<()> {
        self.serialize(row).map_err(io::Error::other)
    }
}

/// Writes one row per access point with its current device count.
pub fn location_snapshot(counts: &[u32], now: SimTime, sink: &mut dyn SnapshotSink) -> io::Result<()> {
    for (ap, &devices) in counts.iter().enumerate() {
        sink.record(SnapshotRow { time_s: now.secs(), ap: ApId(ap as u32).0, devices })?;
    }
    Ok(())
}
