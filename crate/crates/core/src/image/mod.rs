//! Pixel buffers, label maps and masks, HSV conversion, and Set-of-Mark rendering.

mod anchor;
mod buffer;
mod color;
mod label;
mod overlay;
pub mod text;

pub use anchor::{Anchor, Horizontal, Vertical};
pub use buffer::{luma, ImageBuffer, Rgb};
pub use color::{hsv_to_rgb, hue_distance, rgb_to_hsv, ColorHsv};
pub use label::{
    dilate_mask, disc_offsets, mask_from_label, BBox, LabelMap, MaskRegion, ObjectIndex,
};
pub use overlay::{badge_side, render_som_overlay, render_som_overlay_with_layout, som_layout, Badge};
