use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{luma, text, Anchor, BBox, Horizontal, ImageBuffer, MaskRegion, Rgb, Vertical};

use super::EditConfig;

const ELLIPSIS: char = '\u{2026}';

/// Where text goes: a thirds-grid cell or centred on an object.
#[derive(Debug, Clone, Copy)]
pub enum TextSite<'a> {
    Cell(Anchor),
    Object(&'a MaskRegion),
}

/// Result of placing text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextPlacement {
    /// Line box of the rendered text; the outline may extend one pixel beyond.
    pub bbox: BBox,
    pub px: f32,
    pub color: Rgb,
    pub rendered: String,
    pub truncated: bool,
}

/// Margin around anchor cells: 2% of the shorter side.
pub fn text_margin(width: u32, height: u32, config: &EditConfig) -> u32 {
    (config.text_margin_frac * width.min(height) as f64).round() as u32
}

/// Available box `(x0, y0, x1_exclusive, y1_exclusive)` for a cell.
pub fn cell_bounds(width: u32, height: u32, anchor: Anchor, config: &EditConfig) -> (u32, u32, u32, u32) {
    let m = text_margin(width, height, config);
    let (col, row) = anchor.cell();
    let x0 = col * width / 3 + m;
    let x1 = ((col + 1) * width / 3).saturating_sub(m).max(x0 + 1);
    let y0 = row * height / 3 + m;
    let y1 = ((row + 1) * height / 3).saturating_sub(m).max(y0 + 1);
    (x0, y0, x1.min(width), y1.min(height))
}

/// Picks the largest size in `[min, initial]` whose line fits, then truncates
/// with an ellipsis at the minimum size.
fn fit_text(s: &str, max_w: u32, max_h: u32, config: &EditConfig, height: u32) -> (String, f32, bool) {
    let initial = (config.text_size_frac * height as f64).max(config.text_min_px) as f32;
    let min = (config.text_min_frac * height as f64).max(config.text_min_px) as f32;
    let mut px = initial;
    while px >= min {
        let (w, h) = text::measure(s, px);
        if w <= max_w && h <= max_h {
            return (s.to_string(), px, false);
        }
        px -= 0.5;
    }
    let px = min;
    let chars: Vec<char> = s.chars().collect();
    for keep in (0..chars.len()).rev() {
        let mut cand: String = chars[..keep].iter().collect::<String>().trim_end().to_string();
        cand.push(ELLIPSIS);
        if text::measure(&cand, px).0 <= max_w {
            return (cand, px, true);
        }
    }
    (ELLIPSIS.to_string(), px, true)
}

/// Renders one line of text with a one-pixel contrasting outline.
pub fn add_text(
    img: &ImageBuffer,
    s: &str,
    site: TextSite<'_>,
    config: &EditConfig,
) -> Result<(ImageBuffer, TextPlacement)> {
    if s.trim().is_empty() {
        return Err(Error::EmptyText);
    }
    let (w, h) = img.dimensions();
    let m = text_margin(w, h, config);

    let (rendered, px, truncated, origin) = match site {
        TextSite::Cell(anchor) => {
            let (cx0, cy0, cx1, cy1) = cell_bounds(w, h, anchor, config);
            let (rendered, px, truncated) = fit_text(s, cx1 - cx0, cy1 - cy0, config, h);
            let (tw, th) = text::measure(&rendered, px);
            let x = match anchor.horizontal {
                Horizontal::Left => cx0,
                Horizontal::Center => cx0 + (cx1 - cx0).saturating_sub(tw) / 2,
                Horizontal::Right => cx1.saturating_sub(tw).max(cx0),
            };
            let y = match anchor.vertical {
                Vertical::Top => cy0,
                Vertical::Center => cy0 + (cy1 - cy0).saturating_sub(th) / 2,
                Vertical::Bottom => cy1.saturating_sub(th).max(cy0),
            };
            (rendered, px, truncated, (x, y))
        }
        TextSite::Object(mask) => {
            if mask.dimensions() != img.dimensions() {
                return Err(Error::DimensionMismatch {
                    expected: img.dimensions(),
                    actual: mask.dimensions(),
                });
            }
            let max_w = w.saturating_sub(2 * m).max(1);
            let max_h = h.saturating_sub(2 * m).max(1);
            let (rendered, px, truncated) = fit_text(s, max_w, max_h, config, h);
            let (tw, th) = text::measure(&rendered, px);
            let (cx, cy) = mask.centroid();
            let x = cx
                .saturating_sub(tw / 2)
                .clamp(m.min(w - 1), w.saturating_sub(m + tw).max(m.min(w - 1)));
            let y = cy
                .saturating_sub(th / 2)
                .clamp(m.min(h - 1), h.saturating_sub(m + th).max(m.min(h - 1)));
            (rendered, px, truncated, (x, y))
        }
    };

    let glyphs = text::rasterize(&rendered, px);
    let (ox, oy) = origin;
    let bbox = BBox {
        x0: ox,
        y0: oy,
        x1: (ox + glyphs.width - 1).min(w - 1),
        y1: (oy + glyphs.height - 1).min(h - 1),
    };

    let mut sum = 0.0;
    for y in bbox.y0..=bbox.y1 {
        for x in bbox.x0..=bbox.x1 {
            sum += luma(img.get(x, y));
        }
    }
    let mean = sum / (bbox.width() * bbox.height()) as f64;
    // exactly 128 counts as bright, so black text
    let (ink, outline): (Rgb, Rgb) = if mean >= 128.0 {
        ([0; 3], [255; 3])
    } else {
        ([255; 3], [0; 3])
    };

    let inked = |x: i64, y: i64| -> bool {
        let (gx, gy) = (x - ox as i64, y - oy as i64);
        gx >= 0
            && gy >= 0
            && (gx as u32) < glyphs.width
            && (gy as u32) < glyphs.height
            && (x as u32) < w
            && (y as u32) < h
            && glyphs.get(gx as u32, gy as u32)
    };

    let mut out = img.to_vec();
    let zone = bbox.inflate(1, w, h);
    for y in zone.y0..=zone.y1 {
        for x in zone.x0..=zone.x1 {
            let (xi, yi) = (x as i64, y as i64);
            let color = if inked(xi, yi) {
                Some(ink)
            } else if (-1..=1).any(|dy| (-1..=1).any(|dx| inked(xi + dx, yi + dy))) {
                Some(outline)
            } else {
                None
            };
            if let Some(c) = color {
                let i = ((y * w + x) * 3) as usize;
                out[i..i + 3].copy_from_slice(&c);
            }
        }
    }

    let placement = TextPlacement {
        bbox,
        px,
        color: ink,
        rendered,
        truncated,
    };
    Ok((ImageBuffer::from_raw(w, h, out)?, placement))
}
