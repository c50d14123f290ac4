//! Glyph rasterization with the bundled DejaVu Sans face.
//!
//! Coverage is thresholded at 0.5 so rendered text is two-tone and the
//! outline ring around it is well defined.

use std::sync::OnceLock;

use ab_glyph::{point, Font, FontRef, Glyph, PxScale, ScaleFont};

static FONT_BYTES: &[u8] = include_bytes!("../../assets/DejaVuSans.ttf");

fn font() -> &'static FontRef<'static> {
    static FONT: OnceLock<FontRef<'static>> = OnceLock::new();
    FONT.get_or_init(|| FontRef::try_from_slice(FONT_BYTES).expect("bundled font parses"))
}

/// Binary glyph coverage for one line of text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl GlyphMask {
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y * self.width + x) as usize]
    }

    pub fn ink(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

fn layout(text: &str, px: f32) -> (Vec<Glyph>, f32, f32) {
    let scaled = font().as_scaled(PxScale::from(px));
    let ascent = scaled.ascent();
    let mut caret = 0.0f32;
    let mut glyphs = Vec::new();
    let mut prev = None;
    for ch in text.chars() {
        let id = scaled.glyph_id(ch);
        if let Some(p) = prev {
            caret += scaled.kern(p, id);
        }
        glyphs.push(id.with_scale_and_position(PxScale::from(px), point(caret, ascent)));
        caret += scaled.h_advance(id);
        prev = Some(id);
    }
    let line_height = (ascent - scaled.descent()).ceil();
    (glyphs, caret.ceil(), line_height)
}

/// Width and height of the line box at pixel size `px`.
pub fn measure(text: &str, px: f32) -> (u32, u32) {
    let (_, w, h) = layout(text, px);
    (w.max(1.0) as u32, h.max(1.0) as u32)
}

/// Rasterizes `text` into a mask whose size equals [`measure`].
pub fn rasterize(text: &str, px: f32) -> GlyphMask {
    let (glyphs, w, h) = layout(text, px);
    let (width, height) = (w.max(1.0) as u32, h.max(1.0) as u32);
    let mut cov = vec![0.0f32; (width * height) as usize];
    for g in glyphs {
        if let Some(outlined) = font().outline_glyph(g) {
            let b = outlined.px_bounds();
            outlined.draw(|gx, gy, c| {
                let x = b.min.x as i32 + gx as i32;
                let y = b.min.y as i32 + gy as i32;
                if x >= 0 && y >= 0 && (x as u32) < width && (y as u32) < height {
                    let i = (y as u32 * width + x as u32) as usize;
                    cov[i] = (cov[i] + c).min(1.0);
                }
            });
        }
    }
    GlyphMask {
        width,
        height,
        bits: cov.into_iter().map(|c| c >= 0.5).collect(),
    }
}
