use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::image::{hsv_to_rgb, rgb_to_hsv, ColorHsv, ImageBuffer, MaskRegion, Rgb};
use crate::par;

/// Targets at or above this saturation count as chromatic.
pub const CHROMATIC_THRESHOLD: f64 = 0.2;
/// Chromatic targets lift each pixel's saturation to at least this fraction of theirs.
pub const SATURATION_FLOOR: f64 = 0.4;
/// Achromatic targets pull value toward theirs by this fraction.
pub const VALUE_PULL: f64 = 0.8;

/// Lowercase color word to reference RGB (CSS named-color values).
#[derive(Debug, Clone)]
pub struct ColorNameTable {
    colors: BTreeMap<String, Rgb>,
}

impl Default for ColorNameTable {
    fn default() -> Self {
        let entries: &[(&str, Rgb)] = &[
            ("red", [255, 0, 0]),
            ("orange", [255, 165, 0]),
            ("yellow", [255, 255, 0]),
            ("green", [0, 128, 0]),
            ("lime", [0, 255, 0]),
            ("teal", [0, 128, 128]),
            ("cyan", [0, 255, 255]),
            ("blue", [0, 0, 255]),
            ("navy", [0, 0, 128]),
            ("sky blue", [135, 206, 235]),
            ("light blue", [173, 216, 230]),
            ("purple", [128, 0, 128]),
            ("violet", [238, 130, 238]),
            ("magenta", [255, 0, 255]),
            ("pink", [255, 192, 203]),
            ("brown", [165, 42, 42]),
            ("maroon", [128, 0, 0]),
            ("gold", [255, 215, 0]),
            ("beige", [245, 245, 220]),
            ("black", [0, 0, 0]),
            ("white", [255, 255, 255]),
            ("gray", [128, 128, 128]),
            ("grey", [128, 128, 128]),
            ("silver", [192, 192, 192]),
        ];
        Self {
            colors: entries.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl ColorNameTable {
    pub fn lookup(&self, name: &str) -> Result<Rgb> {
        let key = name.trim().to_lowercase().replace('-', " ");
        self.colors
            .get(&key)
            .copied()
            .ok_or_else(|| Error::UnknownColorName(name.to_string()))
    }

    pub fn resolve(&self, name: &str) -> Result<ColorHsv> {
        self.lookup(name).map(rgb_to_hsv)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.colors.keys().map(String::as_str)
    }

    /// Longest color name occurring in `words` as a contiguous run, returned with
    /// its starting position and word length.
    pub fn find_in(&self, words: &[&str]) -> Vec<(usize, usize, String)> {
        let mut found = Vec::new();
        let mut i = 0;
        while i < words.len() {
            let mut hit = None;
            for len in (1..=2).rev() {
                if i + len <= words.len() {
                    let cand = words[i..i + len].join(" ");
                    if self.colors.contains_key(&cand) {
                        hit = Some((len, cand));
                        break;
                    }
                }
            }
            match hit {
                Some((len, name)) => {
                    found.push((i, len, name));
                    i += len;
                }
                None => i += 1,
            }
        }
        found
    }
}

/// Per-pixel recolor rule.
pub fn recolor_pixel(p: Rgb, target: ColorHsv) -> Rgb {
    let hsv = rgb_to_hsv(p);
    let out = if target.is_chromatic(CHROMATIC_THRESHOLD) {
        ColorHsv {
            h: target.h,
            s: hsv.s.max(SATURATION_FLOOR * target.s),
            v: hsv.v,
        }
    } else {
        ColorHsv {
            h: 0.0,
            s: 0.0,
            v: hsv.v + VALUE_PULL * (target.v - hsv.v),
        }
    };
    hsv_to_rgb(out)
}

/// Rewrites hue (and lifts saturation) inside the mask; value is preserved for
/// chromatic targets.
pub fn change_color(img: &ImageBuffer, mask: &MaskRegion, target: ColorHsv) -> Result<ImageBuffer> {
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
                let p = recolor_pixel([row[i], row[i + 1], row[i + 2]], target);
                row[i..i + 3].copy_from_slice(&p);
            }
        }
    });
    ImageBuffer::from_raw(w, h, out)
}
