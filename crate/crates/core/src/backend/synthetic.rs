use super::{BackendRequest, RequestKind, TextRole, VisionBackend};
use crate::error::{Error, Result};

/// Script-free deterministic backend that describes images by simple pixel
/// statistics. Useful for randomized sessions where no script can be written
/// in advance.
#[derive(Debug, Default, Clone, Copy)]
pub struct SyntheticBackend;

impl VisionBackend for SyntheticBackend {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn complete(&self, req: &BackendRequest) -> Result<String> {
        let img = &req.images[0];
        match req.kind {
            RequestKind::GeneralDescription => {
                let n = img.pixel_count() as u64;
                let mut sum = [0u64; 3];
                for px in img.as_raw().chunks_exact(3) {
                    for c in 0..3 {
                        sum[c] += px[c] as u64;
                    }
                }
                let [r, g, b] = sum.map(|s| s / n);
                Ok(format!(
                    "A {}x{} image with mean color ({r}, {g}, {b}).",
                    img.width(),
                    img.height()
                ))
            }
            RequestKind::ObjectDescriptions => {
                let live = req.text(TextRole::LiveIndices).unwrap_or("");
                Ok(live
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|i| format!("Object {i}: region {i}"))
                    .collect::<Vec<_>>()
                    .join("\n"))
            }
            RequestKind::SummaryOfChanges => {
                let changed = req.images[0]
                    .as_raw()
                    .chunks_exact(3)
                    .zip(req.images[1].as_raw().chunks_exact(3))
                    .filter(|(a, b)| a != b)
                    .count();
                Ok(if changed == 0 {
                    "No changes observed.".to_string()
                } else {
                    format!("{changed} pixels changed.")
                })
            }
            RequestKind::Judgement => Ok("The edit was successful.".to_string()),
            RequestKind::AnswerQuestion => Ok("I cannot tell from the image.".to_string()),
            RequestKind::Classify | RequestKind::ResolveReference => Err(Error::BackendRefused {
                status: 501,
                message: format!("{} is not supported by the synthetic backend", req.kind),
            }),
        }
    }
}
