//! In-flight task lookup.
//!
//! `AppendOnly` keeps every record ever registered and finds them by a
//! linear id scan; `Pruned` keys records by id and drops them once they
//! reach a terminal status.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orchestration::TaskRecord;
use crate::types::TaskId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("task {0} already registered")]
    DuplicateId(TaskId),
    #[error("task {0} is not registered")]
    UnknownId(TaskId),
    #[error("task {0} is still in flight")]
    NotTerminal(TaskId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegistryStrategy {
    AppendOnly,
    Pruned,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegistryStats {
    pub size: usize,
    pub peak_size: usize,
    pub probes: u64,
}

#[derive(Debug)]
enum Storage {
    AppendOnly { ids: Vec<TaskId>, records: Vec<TaskRecord> },
    Pruned(HashMap<TaskId, TaskRecord>),
}

#[derive(Debug)]
pub struct Registry {
    storage: Storage,
    peak: usize,
    probes: u64,
}

impl Registry {
    pub fn new(strategy: RegistryStrategy) -> Self {
        let storage = match strategy {
            RegistryStrategy::AppendOnly => Storage::AppendOnly { ids: Vec::new(), records: Vec::new() },
            RegistryStrategy::Pruned => Storage::Pruned(HashMap::new()),
        };
        Self { storage, peak: 0, probes: 0 }
    }

    pub fn strategy(&self) -> RegistryStrategy {
        match self.storage {
            Storage::AppendOnly { .. } => RegistryStrategy::AppendOnly,
            Storage::Pruned(_) => RegistryStrategy::Pruned,
        }
    }

    pub fn len(&self) -> usize {
        match &self.storage {
            Storage::AppendOnly { ids, .. } => ids.len(),
            Storage::Pruned(map) => map.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> RegistryStats {
        RegistryStats { size: self.len(), peak_size: self.peak, probes: self.probes }
    }

    pub fn register(&mut self, record: TaskRecord) -> Result<(), RegistryError> {
        let id = record.properties.id;
        match &mut self.storage {
            Storage::AppendOnly { ids, records } => {
                if ids.contains(&id) {
                    return Err(RegistryError::DuplicateId(id));
                }
                ids.push(id);
                records.push(record);
            }
            Storage::Pruned(map) => {
                if map.contains_key(&id) {
                    return Err(RegistryError::DuplicateId(id));
                }
                map.insert(id, record);
            }
        }
        self.peak = self.peak.max(self.len());
        Ok(())
    }

    fn position(&mut self, id: TaskId) -> Option<usize> {
        let Storage::AppendOnly { ids, .. } = &self.storage else { unreachable!() };
        let pos = ids.iter().position(|&x| x == id);
        self.probes += pos.map_or(ids.len(), |p| p + 1) as u64;
        pos
    }

    pub fn lookup(&mut self, id: TaskId) -> Option<&TaskRecord> {
        self.lookup_mut(id).map(|r| &*r)
    }

    pub fn lookup_mut(&mut self, id: TaskId) -> Option<&mut TaskRecord> {
        if matches!(self.storage, Storage::AppendOnly { .. }) {
            let pos = self.position(id)?;
            let Storage::AppendOnly { records, .. } = &mut self.storage else { unreachable!() };
            return records.get_mut(pos);
        }
        self.probes += 1;
        let Storage::Pruned(map) = &mut self.storage else { unreachable!() };
        map.get_mut(&id)
    }

    /// Releases a terminal record. The append-only strategy keeps it.
    pub fn retire(&mut self, id: TaskId) -> Result<(), RegistryError> {
        match &mut self.storage {
            Storage::AppendOnly { ids, records } => {
                let pos = ids.iter().position(|&x| x == id).ok_or(RegistryError::UnknownId(id))?;
                if !records[pos].status.is_terminal() {
                    return Err(RegistryError::NotTerminal(id));
                }
            }
            Storage::Pruned(map) => {
                let rec = map.get(&id).ok_or(RegistryError::UnknownId(id))?;
                if !rec.status.is_terminal() {
                    return Err(RegistryError::NotTerminal(id));
                }
                map.remove(&id);
            }
        }
        Ok(())
    }
}
