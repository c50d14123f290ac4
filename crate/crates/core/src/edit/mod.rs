//! The five object-level edits. Each is a pure function of its inputs.

mod blur;
mod brightness;
mod inpaint;
mod recolor;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use blur::{blur_object, blur_sigma, gaussian_kernel};
pub use brightness::{adjust_brightness, BrightnessDirection};
pub use inpaint::{
    fill_region, inpaint_boundary_fill, remove_object, removal_region, BoundaryFill,
    InpaintStrategy, RemoteInpainter,
};
pub use recolor::{
    change_color, recolor_pixel, ColorNameTable, CHROMATIC_THRESHOLD, SATURATION_FLOOR, VALUE_PULL,
};
pub use text::{add_text, cell_bounds, text_margin, TextPlacement, TextSite};

use crate::error::{Error, Result};
use crate::image::{mask_from_label, Anchor, ColorHsv, ImageBuffer, LabelMap, ObjectIndex};

/// Tunable edit parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EditConfig {
    pub blur_min_sigma: f64,
    pub blur_sigma_divisor: f64,
    pub brightness_step: u8,
    pub dilation_radius: u32,
    /// Initial text size as a fraction of image height.
    pub text_size_frac: f64,
    /// Smallest size shrink-to-fit may reach, as a fraction of image height.
    pub text_min_frac: f64,
    /// Absolute floor for both sizes, so tiny images stay legible.
    pub text_min_px: f64,
    pub text_margin_frac: f64,
}

impl Default for EditConfig {
    fn default() -> Self {
        Self {
            blur_min_sigma: 3.0,
            blur_sigma_divisor: 16.0,
            brightness_step: 40,
            dilation_radius: 5,
            text_size_frac: 0.05,
            text_min_frac: 0.02,
            text_min_px: 8.0,
            text_margin_frac: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Blur,
    Remove,
    ChangeColor,
    AdjustBrightness,
    AddText,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextTarget {
    Anchor(Anchor),
    Object,
}

/// An edit with its parameters. The object it applies to travels separately
/// (see [`crate::router::EditIntent`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EditAction {
    Blur,
    Remove,
    ChangeColor { color: String, target: ColorHsv },
    AdjustBrightness { direction: BrightnessDirection },
    AddText { text: String, target: TextTarget },
}

impl EditAction {
    pub fn kind(&self) -> ActionKind {
        match self {
            EditAction::Blur => ActionKind::Blur,
            EditAction::Remove => ActionKind::Remove,
            EditAction::ChangeColor { .. } => ActionKind::ChangeColor,
            EditAction::AdjustBrightness { .. } => ActionKind::AdjustBrightness,
            EditAction::AddText { .. } => ActionKind::AddText,
        }
    }

    /// Whether the action acts on an object (everything except anchored text).
    pub fn needs_object(&self) -> bool {
        !matches!(
            self,
            EditAction::AddText {
                target: TextTarget::Anchor(_),
                ..
            }
        )
    }

    pub fn change_color(name: &str, table: &ColorNameTable) -> Result<Self> {
        Ok(EditAction::ChangeColor {
            color: name.to_lowercase(),
            target: table.resolve(name)?,
        })
    }
}

/// Output of [`apply_action`].
#[derive(Debug, Clone)]
pub struct Applied {
    pub image: ImageBuffer,
    /// Pixels the action was allowed to touch; everything else is bit-exact.
    pub write_region: Vec<bool>,
    pub placement: Option<TextPlacement>,
}

/// Applies `action` to `object` (ignored for anchored text).
pub fn apply_action(
    img: &ImageBuffer,
    map: &LabelMap,
    action: &EditAction,
    object: Option<ObjectIndex>,
    inpainter: &dyn InpaintStrategy,
    config: &EditConfig,
) -> Result<Applied> {
    map.check_dimensions(img.dimensions())?;
    let mask = match (action.needs_object(), object) {
        (true, Some(i)) => Some(mask_from_label(map, i)?),
        (true, None) => return Err(Error::MissingParameter("object".into())),
        (false, _) => None,
    };
    let region_of = |m: &crate::image::MaskRegion| m.bitmap().to_vec();
    let (image, write_region, placement) = match action {
        EditAction::Blur => {
            let m = mask.expect("object action");
            (blur_object(img, &m, config)?, region_of(&m), None)
        }
        EditAction::Remove => {
            let m = mask.expect("object action");
            let out = remove_object(img, &m, inpainter, config)?;
            (out, region_of(&removal_region(&m, config)), None)
        }
        EditAction::ChangeColor { target, .. } => {
            let m = mask.expect("object action");
            (change_color(img, &m, *target)?, region_of(&m), None)
        }
        EditAction::AdjustBrightness { direction } => {
            let m = mask.expect("object action");
            let out = adjust_brightness(img, &m, *direction, config.brightness_step)?;
            (out, region_of(&m), None)
        }
        EditAction::AddText { text, target } => {
            let site = match (target, &mask) {
                (TextTarget::Anchor(a), _) => TextSite::Cell(*a),
                (TextTarget::Object, Some(m)) => TextSite::Object(m),
                (TextTarget::Object, None) => unreachable!("checked above"),
            };
            let (out, placement) = add_text(img, text, site, config)?;
            let (w, h) = img.dimensions();
            let zone = placement.bbox.inflate(1, w, h);
            let region = (0..w * h).map(|i| zone.contains(i % w, i / w)).collect();
            (out, region, Some(placement))
        }
    };
    Ok(Applied {
        image,
        write_region,
        placement,
    })
}
