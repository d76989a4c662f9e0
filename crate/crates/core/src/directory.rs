//! The directory facilitator: white pages by agent id, yellow pages by
//! service name.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::AgentId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectoryEntry {
    pub id: AgentId,
    pub name: String,
    pub services: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DirectoryError {
    #[error("agent {0} is already registered")]
    Duplicate(AgentId),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Directory {
    white_pages: BTreeMap<AgentId, DirectoryEntry>,
    yellow_pages: BTreeMap<String, Vec<AgentId>>,
}

impl Directory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, entry: DirectoryEntry) -> Result<(), DirectoryError> {
        if self.white_pages.contains_key(&entry.id) {
            return Err(DirectoryError::Duplicate(entry.id));
        }
        for service in &entry.services {
            let ids = self.yellow_pages.entry(service.clone()).or_default();
            if !ids.contains(&entry.id) {
                ids.push(entry.id);
            }
        }
        self.white_pages.insert(entry.id, entry);
        Ok(())
    }

    pub fn unregister(&mut self, id: AgentId) -> Option<DirectoryEntry> {
        let entry = self.white_pages.remove(&id)?;
        for service in &entry.services {
            if let Some(ids) = self.yellow_pages.get_mut(service) {
                ids.retain(|a| *a != id);
                if ids.is_empty() {
                    self.yellow_pages.remove(service);
                }
            }
        }
        Some(entry)
    }

    pub fn get(&self, id: AgentId) -> Option<&DirectoryEntry> {
        self.white_pages.get(&id)
    }

    pub fn contains(&self, id: AgentId) -> bool {
        self.white_pages.contains_key(&id)
    }

    /// Agents providing `service`, in registration order.
    pub fn lookup(&self, service: &str) -> Vec<&DirectoryEntry> {
        self.yellow_pages
            .get(service)
            .map(|ids| ids.iter().filter_map(|id| self.white_pages.get(id)).collect())
            .unwrap_or_default()
    }

    /// All registered agent ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.white_pages.keys().copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DirectoryEntry> {
        self.white_pages.values()
    }

    pub fn services(&self) -> impl Iterator<Item = &str> {
        self.yellow_pages.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.white_pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.white_pages.is_empty()
    }
}

/// Free-function form of [`Directory::lookup`] returning owned entries.
pub fn directory_lookup(directory: &Directory, service: &str) -> Vec<DirectoryEntry> {
    directory.lookup(service).into_iter().cloned().collect()
}
