use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ImageBuffer, MaskRegion};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BrightnessDirection {
    Brighter,
    Darker,
}

/// Adds (or subtracts) `step` to every channel of every masked pixel, clamped.
pub fn adjust_brightness(
    img: &ImageBuffer,
    mask: &MaskRegion,
    direction: BrightnessDirection,
    step: u8,
) -> Result<ImageBuffer> {
    if mask.dimensions() != img.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: img.dimensions(),
            actual: mask.dimensions(),
        });
    }
    let (w, h) = img.dimensions();
    let b = mask.bbox();
    let mut out = img.to_vec();
    par::for_each_row(&mut out, w as usize * 3, |y, row| {
        let y = y as u32;
        if y < b.y0 || y > b.y1 {
            return;
        }
        for x in b.x0..=b.x1 {
            if mask.contains(x, y) {
                let i = x as usize * 3;
                for c in &mut row[i..i + 3] {
                    *c = match direction {
                        BrightnessDirection::Brighter => c.saturating_add(step),
                        BrightnessDirection::Darker => c.saturating_sub(step),
                    };
                }
            }
        }
    });
    ImageBuffer::from_raw(w, h, out)
}
