use std::io::Write;
use std::path::{Path, PathBuf};

use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::session::{replay, ReplayReport, SessionTranscript};
use veriloop_core::{Error, Result};
use veriloop_service::BackendSource;

/// The four files a replayable scene needs.
pub struct SceneFiles {
    pub transcript: PathBuf,
    pub image: PathBuf,
    pub labels: PathBuf,
}

impl SceneFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            transcript: dir.join("transcript.json"),
            image: dir.join("image.png"),
            labels: dir.join("labels.png"),
        }
    }

    pub fn check(&self, extra: &[&Path]) -> Result<()> {
        for p in [&*self.transcript, &*self.image, &*self.labels].into_iter().chain(extra.iter().copied()) {
            if !p.is_file() {
                return Err(Error::MissingFixture(p.display().to_string()));
            }
        }
        Ok(())
    }
}

pub fn run(files: &SceneFiles, source: &BackendSource) -> Result<ReplayReport> {
    let transcript = SessionTranscript::load(&files.transcript)?;
    let image = ImageBuffer::load(&files.image)?;
    let labels = LabelMap::load(&files.labels)?;
    replay(&transcript, image, labels, source.backend()?, source.inpainter())
}

/// One line per edit, then the mismatches and a tally.
pub fn print(report: &ReplayReport, out: &mut impl Write) -> std::io::Result<()> {
    for c in &report.edits {
        if c.ok {
            writeln!(out, "edit #{}: pass {}", c.seq, short(&c.expected))?;
        } else {
            let got = c.actual.as_deref().map(short).unwrap_or("no edit");
            writeln!(out, "edit #{}: FAIL expected {} got {got}", c.seq, short(&c.expected))?;
        }
    }
    if !report.initial_matches {
        writeln!(out, "opening descriptions differ")?;
    }
    for (_, why) in &report.other_mismatches {
        writeln!(out, "{why}")?;
    }
    if !report.chat_matches {
        writeln!(out, "chat log differs")?;
    }
    let ok = report.edits.iter().filter(|c| c.ok).count();
    writeln!(out, "{ok}/{} edits match", report.edits.len())
}

fn short(digest: &str) -> &str {
    &digest[..digest.len().min(16)]
}
