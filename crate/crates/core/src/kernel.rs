//! Discrete-event core: clock, future event queue and dispatch loop.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::load::TaskProperties;
use crate::types::{DeviceId, SimTime, TaskId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("cannot schedule at {time} when the clock reads {now}")]
    SchedulingInPast { time: SimTime, now: SimTime },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    DeviceMove(DeviceId),
    ActivePeriodStart(DeviceId),
    TaskArrival(TaskProperties),
    UploadDone(TaskId),
    ExecDone(TaskId),
    DownloadDone(TaskId),
    LocationSnapshot,
}

/// Discriminant of [`EventKind`] without payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventTag {
    DeviceMove,
    ActivePeriodStart,
    TaskArrival,
    UploadDone,
    ExecDone,
    DownloadDone,
    LocationSnapshot,
}

impl EventKind {
    pub fn tag(&self) -> EventTag {
        match self {
            EventKind::DeviceMove(_) => EventTag::DeviceMove,
            EventKind::ActivePeriodStart(_) => EventTag::ActivePeriodStart,
            EventKind::TaskArrival(_) => EventTag::TaskArrival,
            EventKind::UploadDone(_) => EventTag::UploadDone,
            EventKind::ExecDone(_) => EventTag::ExecDone,
            EventKind::DownloadDone(_) => EventTag::DownloadDone,
            EventKind::LocationSnapshot => EventTag::LocationSnapshot,
        }
    }

    /// Lifecycle events of in-flight tasks still dispatch after the horizon.
    pub fn drains_past_horizon(&self) -> bool {
        matches!(self, EventKind::UploadDone(_) | EventKind::ExecDone(_) | EventKind::DownloadDone(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

// Reversed so that BinaryHeap (a max-heap) yields the minimum (time, seq).
struct Entry(Event);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.time.cmp(&self.0.time).then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

/// Pending events ordered by `(time, seq)`.
#[derive(Default)]
pub struct FutureEventQueue {
    heap: BinaryHeap<Entry>,
    next_seq: u64,
    peak: usize,
}

impl FutureEventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: SimTime, kind: EventKind, now: SimTime) -> Result<u64, KernelError> {
        if time < now {
            return Err(KernelError::SchedulingInPast { time, now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry(Event { time, seq, kind }));
        self.peak = self.peak.max(self.heap.len());
        Ok(seq)
    }

    pub fn pop_next(&mut self) -> Option<Event> {
        self.heap.pop().map(|e| e.0)
    }

    pub fn peek(&self) -> Option<&Event> {
        self.heap.peek().map(|e| &e.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn scheduled_count(&self) -> u64 {
        self.next_seq
    }

    pub fn peak_size(&self) -> usize {
        self.peak
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunStats {
    pub events_dispatched: u64,
    pub peak_queue_size: usize,
    pub wall_time: Duration,
}

/// One simulation clock plus its event queue.
///
/// Events that are not task lifecycle events and fall past the horizon are
/// never dispatched; the run parks them and they count as remaining.
#[derive(Default)]
pub struct Kernel {
    queue: FutureEventQueue,
    now: SimTime,
    dispatched: u64,
    parked: Vec<Event>,
}

impl Kernel {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(&mut self, time: SimTime, kind: EventKind) -> Result<u64, KernelError> {
        self.queue.schedule(time, kind, self.now)
    }

    pub fn schedule_after(&mut self, delay_s: f64, kind: EventKind) -> Result<u64, KernelError> {
        self.schedule(self.now + delay_s, kind)
    }

    pub fn queue(&self) -> &FutureEventQueue {
        &self.queue
    }

    pub fn dispatched_count(&self) -> u64 {
        self.dispatched
    }

    /// Queued plus parked events.
    pub fn remaining_count(&self) -> u64 {
        (self.queue.len() + self.parked.len()) as u64
    }

    /// Dispatches events in `(time, seq)` order until nothing dispatchable
    /// is left. The handler is the only place simulation state changes.
    pub fn run<E, F>(&mut self, horizon: SimTime, mut handler: F) -> Result<RunStats, E>
    where
        F: FnMut(&mut Kernel, Event) -> Result<(), E>,
        E: From<KernelError>,
    {
        let started = Instant::now();
        let dispatched_before = self.dispatched;
        while let Some(event) = self.queue.pop_next() {
            if event.time > horizon && !event.kind.drains_past_horizon() {
                self.parked.push(event);
                continue;
            }
            debug_assert!(event.time >= self.now);
            self.now = event.time;
            self.dispatched += 1;
            handler(self, event)?;
        }
        Ok(RunStats {
            events_dispatched: self.dispatched - dispatched_before,
            peak_queue_size: self.queue.peak_size(),
            wall_time: started.elapsed(),
        })
    }
}
