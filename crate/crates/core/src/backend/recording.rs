use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{check_grounding, BackendRequest, ContextText, RequestKind, VisionBackend};
use crate::error::Result;

/// One logged backend call. Images are recorded by digest only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRecord {
    pub seq: usize,
    pub kind: RequestKind,
    pub images: Vec<String>,
    pub texts: Vec<ContextText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

/// Wraps a backend, checks the grounding rules on every request, and keeps a
/// wire log (optionally mirrored to a JSON-lines file).
///
/// Violations are counted and logged but the call is still forwarded, so a
/// replay reports every violation instead of stopping at the first.
pub struct RecordingBackend<B> {
    inner: B,
    records: Mutex<Vec<WireRecord>>,
    violations: AtomicUsize,
    sink: Option<Mutex<BufWriter<File>>>,
}

impl<B: VisionBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        Self {
            inner,
            records: Mutex::new(Vec::new()),
            violations: AtomicUsize::new(0),
            sink: None,
        }
    }

    pub fn with_log_file(inner: B, path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        let mut rec = Self::new(inner);
        rec.sink = Some(Mutex::new(BufWriter::new(file)));
        Ok(rec)
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }

    pub fn violations(&self) -> usize {
        self.violations.load(Ordering::SeqCst)
    }

    pub fn records(&self) -> Vec<WireRecord> {
        self.records.lock().expect("wire log").clone()
    }
}

impl<B: VisionBackend> VisionBackend for RecordingBackend<B> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn complete(&self, req: &BackendRequest) -> Result<String> {
        let violation = check_grounding(req).err().map(|e| e.to_string());
        if let Some(v) = &violation {
            self.violations.fetch_add(1, Ordering::SeqCst);
            log::error!("grounding violation: {v}");
        }
        let result = self.inner.complete(req);
        let mut records = self.records.lock().expect("wire log");
        let record = WireRecord {
            seq: records.len() + 1,
            kind: req.kind,
            images: req.image_digests(),
            texts: req.texts.clone(),
            response: result.as_ref().ok().cloned(),
            error: result.as_ref().err().map(|e| e.to_string()),
            violation,
        };
        if let Some(sink) = &self.sink {
            let mut w = sink.lock().expect("wire sink");
            let line = serde_json::to_string(&record)?;
            writeln!(w, "{line}")?;
            w.flush()?;
        }
        records.push(record);
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{SyntheticBackend, TextRole};
    use crate::image::ImageBuffer;

    #[test]
    fn counts_violations_and_logs_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wire.jsonl");
        let rec = RecordingBackend::with_log_file(SyntheticBackend, &path).unwrap();
        let a = ImageBuffer::filled(2, 2, [1; 3]).unwrap();
        rec.complete(&BackendRequest::general_description(&a)).unwrap();
        let mut bad = BackendRequest::summary_of_changes(&a, &a).unwrap();
        bad.texts.push(ContextText {
            role: TextRole::NewGeneral,
            text: "x".into(),
        });
        rec.complete(&bad).unwrap();
        assert_eq!(rec.violations(), 1);
        let lines: Vec<WireRecord> = std::fs::read_to_string(&path)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines, rec.records());
        assert!(lines[1].violation.is_some());
        assert_eq!(lines[0].images, vec![a.digest()]);
    }
}
