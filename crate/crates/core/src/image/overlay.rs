//! Set-of-Mark overlay: object boundaries plus a numbered badge per object.

use serde::{Deserialize, Serialize};

use super::buffer::{luma, ImageBuffer};
use super::label::{mask_from_label, BBox, LabelMap, ObjectIndex};
use super::text;

/// Where an index badge was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Badge {
    pub index: ObjectIndex,
    pub bbox: BBox,
}

/// Badge side in pixels: max(12, 3% of the shorter side), capped by the image.
pub fn badge_side(width: u32, height: u32) -> u32 {
    let short = width.min(height);
    let side = ((short as f64) * 0.03).ceil() as u32;
    side.max(12).min(short)
}

/// Badge placement for every labelled object, without drawing.
pub fn som_layout(map: &LabelMap) -> Vec<Badge> {
    let (w, h) = map.dimensions();
    let side = badge_side(w, h);
    map.indices()
        .into_iter()
        .map(|index| {
            let mask = mask_from_label(map, index).expect("index taken from map");
            let (cx, cy) = mask.centroid();
            let x0 = cx.saturating_sub(side / 2).min(w - side);
            let y0 = cy.saturating_sub(side / 2).min(h - side);
            Badge {
                index,
                bbox: BBox {
                    x0,
                    y0,
                    x1: x0 + side - 1,
                    y1: y0 + side - 1,
                },
            }
        })
        .collect()
}

/// Renders boundaries and index badges onto a copy of `img`.
pub fn render_som_overlay(img: &ImageBuffer, map: &LabelMap) -> ImageBuffer {
    render_som_overlay_with_layout(img, map).0
}

pub fn render_som_overlay_with_layout(img: &ImageBuffer, map: &LabelMap) -> (ImageBuffer, Vec<Badge>) {
    assert_eq!(img.dimensions(), map.dimensions(), "label map must match image");
    let badges = som_layout(map);
    if badges.is_empty() {
        return (img.clone(), badges);
    }
    let (w, h) = img.dimensions();
    let mut out = img.to_vec();

    // boundary stroke: labelled pixels with a 4-neighbour carrying another label
    for y in 0..h {
        for x in 0..w {
            let l = map.get(x, y);
            if l == 0 {
                continue;
            }
            let edge = (x > 0 && map.get(x - 1, y) != l)
                || (x + 1 < w && map.get(x + 1, y) != l)
                || (y > 0 && map.get(x, y - 1) != l)
                || (y + 1 < h && map.get(x, y + 1) != l);
            if edge {
                let stroke = if luma(img.get(x, y)) < 128.0 { 255 } else { 0 };
                let i = ((y * w + x) * 3) as usize;
                out[i..i + 3].fill(stroke);
            }
        }
    }

    for badge in &badges {
        draw_badge(img, &mut out, badge);
    }
    let overlay = ImageBuffer::from_raw(w, h, out).expect("same dimensions");
    (overlay, badges)
}

fn draw_badge(src: &ImageBuffer, out: &mut [u8], badge: &Badge) {
    let w = src.width();
    let b = badge.bbox;
    let side = b.width();

    let mut sum = 0.0;
    for y in b.y0..=b.y1 {
        for x in b.x0..=b.x1 {
            sum += luma(src.get(x, y));
        }
    }
    let mean = sum / (side * side) as f64;
    let (fill, ink) = if mean >= 128.0 { (0u8, 255u8) } else { (255u8, 0u8) };

    for y in b.y0..=b.y1 {
        for x in b.x0..=b.x1 {
            let i = ((y * w + x) * 3) as usize;
            out[i..i + 3].fill(fill);
        }
    }

    let label = badge.index.to_string();
    let room = side.saturating_sub(2).max(1);
    let mut px = side as f32;
    let glyphs = loop {
        let (tw, th) = text::measure(&label, px);
        if (tw <= room && th <= room) || px <= 4.0 {
            break text::rasterize(&label, px);
        }
        px -= 1.0;
    };
    let ox = b.x0 + side.saturating_sub(glyphs.width) / 2;
    let oy = b.y0 + side.saturating_sub(glyphs.height) / 2;
    for gy in 0..glyphs.height {
        for gx in 0..glyphs.width {
            let (x, y) = (ox + gx, oy + gy);
            if glyphs.get(gx, gy) && b.contains(x, y) {
                let i = ((y * w + x) * 3) as usize;
                out[i..i + 3].fill(ink);
            }
        }
    }
}
