//! One directory per session:
//!
//! ```text
//! <root>/<session id>/original.png
//!                     labels.png
//!                     snapshots/<digest>.png   one per edit in the current history
//!                     transcript.json
//!                     wire.jsonl               backend wire log
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use veriloop_core::backend::VisionBackend;
use veriloop_core::edit::InpaintStrategy;
use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::session::{EditSession, SessionTranscript};
use veriloop_core::{Error, Result};

const ORIGINAL: &str = "original.png";
const LABELS: &str = "labels.png";
const SNAPSHOTS: &str = "snapshots";
const TRANSCRIPT: &str = "transcript.json";
const WIRE: &str = "wire.jsonl";

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.dir(id).exists()
    }

    pub fn wire_log(&self, id: &str) -> PathBuf {
        self.dir(id).join(WIRE)
    }

    /// Makes the directory before the session exists so the wire log can be opened.
    pub fn reserve(&self, id: &str) -> Result<PathBuf> {
        let dir = self.dir(id);
        fs::create_dir_all(dir.join(SNAPSHOTS))?;
        Ok(dir)
    }

    pub fn discard(&self, id: &str) {
        if let Err(e) = fs::remove_dir_all(self.dir(id)) {
            log::warn!("could not remove {}: {e}", self.dir(id).display());
        }
    }

    /// Writes inputs, snapshots of the current history and the transcript.
    /// Snapshots of discarded branches are pruned; restore recomputes them.
    pub fn save(&self, session: &EditSession) -> Result<()> {
        let dir = self.reserve(session.id())?;
        if !dir.join(ORIGINAL).exists() {
            write_atomic(&dir.join(ORIGINAL), &session.original().encode_png())?;
            write_atomic(&dir.join(LABELS), &session.labels().encode_png())?;
        }
        let snapshots = dir.join(SNAPSHOTS);
        let mut keep = HashSet::new();
        for rec in session.history() {
            let digest = rec.image_after.digest();
            let path = snapshots.join(format!("{digest}.png"));
            if !path.exists() {
                write_atomic(&path, &rec.image_after.encode_png())?;
            }
            keep.insert(format!("{digest}.png"));
        }
        for entry in fs::read_dir(&snapshots)? {
            let entry = entry?;
            if !keep.contains(entry.file_name().to_string_lossy().as_ref()) {
                fs::remove_file(entry.path())?;
            }
        }
        write_atomic(&dir.join(TRANSCRIPT), session.transcript().to_json().as_bytes())
    }

    /// Ids of sessions with a transcript on disk, sorted.
    pub fn ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if entry.path().join(TRANSCRIPT).is_file() {
                ids.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn load(&self, id: &str, backend: Arc<dyn VisionBackend>, inpainter: Arc<dyn InpaintStrategy>) -> Result<EditSession> {
        let dir = self.dir(id);
        let transcript = SessionTranscript::load(dir.join(TRANSCRIPT))?;
        if transcript.session_id != id {
            return Err(Error::Config(format!(
                "{} holds session {}",
                dir.display(),
                transcript.session_id
            )));
        }
        let original = ImageBuffer::load(dir.join(ORIGINAL))?;
        let labels = LabelMap::load(dir.join(LABELS))?;
        let snapshots = dir.join(SNAPSHOTS);
        let snapshot = |_: u32, digest: &str| ImageBuffer::load(snapshots.join(format!("{digest}.png"))).ok();
        EditSession::restore(&transcript, original, labels, backend, inpainter, &snapshot)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
