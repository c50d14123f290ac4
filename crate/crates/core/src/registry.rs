use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{LabelMap, ObjectIndex};

/// Marker shown in place of a removed object's description.
pub const REMOVED: &str = "[removed]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectStatus {
    Live,
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub index: ObjectIndex,
    pub description: String,
    pub status: ObjectStatus,
}

impl ObjectEntry {
    pub fn is_live(&self) -> bool {
        self.status == ObjectStatus::Live
    }

    /// `Object <n>: <description>` or `Object <n>: [removed]`.
    pub fn line(&self) -> String {
        match self.status {
            ObjectStatus::Live => format!("Object {}: {}", self.index, self.description),
            ObjectStatus::Removed => format!("Object {}: {REMOVED}", self.index),
        }
    }
}

/// Objects of one image state with their current descriptions, plus the
/// general description of that state.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObjectRegistry {
    pub general: String,
    entries: Vec<ObjectEntry>,
}

impl ObjectRegistry {
    /// Builds a registry for every index in `map`. `descriptions` must cover them all.
    pub fn from_descriptions(
        map: &LabelMap,
        general: String,
        descriptions: &[(ObjectIndex, String)],
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for idx in map.indices() {
            let d = descriptions
                .iter()
                .find(|(i, _)| *i == idx)
                .ok_or(Error::MissingIndexInResponse(idx))?;
            entries.push(ObjectEntry {
                index: idx,
                description: d.1.clone(),
                status: ObjectStatus::Live,
            });
        }
        Ok(Self { general, entries })
    }

    pub fn from_entries(general: String, mut entries: Vec<ObjectEntry>) -> Self {
        entries.sort_by_key(|e| e.index);
        entries.dedup_by_key(|e| e.index);
        Self { general, entries }
    }

    pub fn entries(&self) -> &[ObjectEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: ObjectIndex) -> Option<&ObjectEntry> {
        self.entries.iter().find(|e| e.index == index)
    }

    pub fn live(&self) -> impl Iterator<Item = &ObjectEntry> {
        self.entries.iter().filter(|e| e.is_live())
    }

    pub fn live_indices(&self) -> Vec<ObjectIndex> {
        self.live().map(|e| e.index).collect()
    }

    /// `Ok` if `index` exists and is live.
    pub fn check_live(&self, index: ObjectIndex) -> Result<()> {
        match self.get(index) {
            None => Err(Error::UnknownObjectIndex(index)),
            Some(e) if !e.is_live() => Err(Error::ObjectNotLive(index)),
            Some(_) => Ok(()),
        }
    }

    pub fn mark_removed(&mut self, index: ObjectIndex) -> Result<()> {
        self.check_live(index)?;
        let e = self.entries.iter_mut().find(|e| e.index == index).expect("checked");
        e.status = ObjectStatus::Removed;
        Ok(())
    }

    /// Replaces descriptions of the listed live objects.
    pub fn update_descriptions(&mut self, descriptions: &[(ObjectIndex, String)]) {
        for (i, d) in descriptions {
            if let Some(e) = self.entries.iter_mut().find(|e| e.index == *i && e.is_live()) {
                e.description = d.clone();
            }
        }
    }

    /// One line per object, removed ones marked.
    pub fn lines(&self) -> Vec<String> {
        self.entries.iter().map(ObjectEntry::line).collect()
    }

    pub fn listing(&self) -> String {
        self.lines().join("\n")
    }

    /// Label map restricted to live objects.
    pub fn live_map(&self, map: &LabelMap) -> LabelMap {
        map.retain(|i| self.get(i).is_some_and(ObjectEntry::is_live))
    }
}
