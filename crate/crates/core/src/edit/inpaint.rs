use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::http::HttpClient;
use crate::image::{dilate_mask, ImageBuffer, MaskRegion};

use super::EditConfig;

/// Fills a masked region from its surroundings.
pub trait InpaintStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Returns an image whose pixels inside `fill` are synthesized; pixels
    /// outside may be anything, callers composite.
    fn inpaint(&self, img: &ImageBuffer, fill: &MaskRegion) -> Result<ImageBuffer>;
}

/// In-process onion-peel fill.
#[derive(Debug, Default, Clone, Copy)]
pub struct BoundaryFill;

impl InpaintStrategy for BoundaryFill {
    fn name(&self) -> &str {
        "baseline"
    }

    fn inpaint(&self, img: &ImageBuffer, fill: &MaskRegion) -> Result<ImageBuffer> {
        inpaint_boundary_fill(img, fill)
    }
}

pub fn inpaint_boundary_fill(img: &ImageBuffer, fill: &MaskRegion) -> Result<ImageBuffer> {
    fill_region(img, fill.bitmap())
}

/// Onion-peel fill of the pixels flagged in `fill`.
///
/// Each pass assigns every still-unknown pixel that touches a known 8-neighbour
/// the mean of those known neighbours, using values from before the pass.
/// An empty region returns the input unchanged.
pub fn fill_region(img: &ImageBuffer, fill: &[bool]) -> Result<ImageBuffer> {
    let (w, h) = img.dimensions();
    if fill.len() != img.pixel_count() {
        return Err(Error::DimensionMismatch {
            expected: img.dimensions(),
            actual: (fill.len() as u32, 1),
        });
    }
    if !fill.iter().any(|&b| b) {
        return Ok(img.clone());
    }
    if fill.iter().all(|&b| b) {
        return Err(Error::MaskCoversImage);
    }

    let mut known: Vec<bool> = fill.iter().map(|&b| !b).collect();
    let mut vals: Vec<[f64; 3]> = (0..img.pixel_count())
        .map(|i| {
            let p = img.get_index(i);
            [p[0] as f64, p[1] as f64, p[2] as f64]
        })
        .collect();
    let mut pending: Vec<usize> = (0..fill.len()).filter(|&i| fill[i]).collect();

    while !pending.is_empty() {
        let mut layer = Vec::new();
        let mut rest = Vec::new();
        for &i in &pending {
            let (x, y) = ((i % w as usize) as i64, (i / w as usize) as i64);
            let mut acc = [0.0; 3];
            let mut n = 0u32;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = (ny * w as i64 + nx) as usize;
                    if known[j] {
                        for ch in 0..3 {
                            acc[ch] += vals[j][ch];
                        }
                        n += 1;
                    }
                }
            }
            if n > 0 {
                layer.push((i, acc.map(|a| a / n as f64)));
            } else {
                rest.push(i);
            }
        }
        debug_assert!(!layer.is_empty(), "grid is connected, peeling always progresses");
        for (i, v) in layer {
            vals[i] = v;
            known[i] = true;
        }
        pending = rest;
    }

    let data = vals
        .into_iter()
        .flat_map(|v| v.map(|c| c.round().clamp(0.0, 255.0) as u8))
        .collect();
    ImageBuffer::from_raw(w, h, data)
}

/// Dilated mask actually rewritten by `remove_object`.
pub fn removal_region(mask: &MaskRegion, config: &EditConfig) -> MaskRegion {
    dilate_mask(mask, config.dilation_radius)
}

/// Removes the object by inpainting its dilated mask. Pixels outside the
/// dilated mask are copied from the input whatever the strategy returns.
pub fn remove_object(
    img: &ImageBuffer,
    mask: &MaskRegion,
    strategy: &dyn InpaintStrategy,
    config: &EditConfig,
) -> Result<ImageBuffer> {
    if mask.dimensions() != img.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: img.dimensions(),
            actual: mask.dimensions(),
        });
    }
    let fill = removal_region(mask, config);
    if fill.covers_everything() {
        return Err(Error::MaskCoversImage);
    }
    let synthesized = strategy.inpaint(img, &fill)?;
    if synthesized.dimensions() != img.dimensions() {
        return Err(Error::MalformedResponse(format!(
            "inpainter returned {:?} for a {:?} image",
            synthesized.dimensions(),
            img.dimensions()
        )));
    }
    let mut out = img.to_vec();
    for (i, _) in fill.bitmap().iter().enumerate().filter(|(_, &b)| b) {
        out[3 * i..3 * i + 3].copy_from_slice(&synthesized.get_index(i));
    }
    ImageBuffer::from_raw(img.width(), img.height(), out)
}

/// HTTP inpainting service. Request body:
/// `{"image": <base64 png>, "mask": <base64 8-bit png, 255 = fill>}`;
/// the reply is either `image/png` bytes or `{"image": <base64 png>}`.
#[derive(Debug, Clone)]
pub struct RemoteInpainter {
    endpoint: String,
    client: HttpClient,
}

impl RemoteInpainter {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, retries: u32) -> Self {
        Self {
            endpoint: endpoint.into(),
            client: HttpClient::new(timeout, retries, Duration::from_millis(200)),
        }
    }

    pub fn with_client(endpoint: impl Into<String>, client: HttpClient) -> Self {
        Self {
            endpoint: endpoint.into(),
            client,
        }
    }
}

#[derive(Deserialize)]
struct InpaintReply {
    image: String,
}

fn mask_png(fill: &MaskRegion) -> Vec<u8> {
    let (w, h) = fill.dimensions();
    let bytes: Vec<u8> = fill.bitmap().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let img = image::GrayImage::from_raw(w, h, bytes).expect("mask dimensions");
    let mut out = std::io::Cursor::new(Vec::new());
    img.write_to(&mut out, image::ImageFormat::Png)
        .expect("in-memory png encoding");
    out.into_inner()
}

impl InpaintStrategy for RemoteInpainter {
    fn name(&self) -> &str {
        "remote"
    }

    fn inpaint(&self, img: &ImageBuffer, fill: &MaskRegion) -> Result<ImageBuffer> {
        let body = serde_json::json!({
            "image": B64.encode(img.encode_png()),
            "mask": B64.encode(mask_png(fill)),
        });
        let reply = self.client.post_json(&self.endpoint, &[], &body)?;
        if reply.is_png() {
            return ImageBuffer::decode(&reply.body).map_err(|e| Error::MalformedResponse(e.to_string()));
        }
        let parsed: InpaintReply = serde_json::from_slice(&reply.body)
            .map_err(|e| Error::MalformedResponse(e.to_string()))?;
        let bytes = B64
            .decode(parsed.image)
            .map_err(|e| Error::MalformedResponse(e.to_string()))?;
        ImageBuffer::decode(&bytes).map_err(|e| Error::MalformedResponse(e.to_string()))
    }
}
