use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;
use std::sync::Arc;

use image::{ImageBuffer as RawImage, ImageFormat, Luma};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Positive, session-stable object number. Label value 0 means "unlabeled".
pub type ObjectIndex = u32;

/// Row-major raster of object indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: u32,
    height: u32,
    labels: Arc<[u16]>,
}

impl LabelMap {
    pub fn new(width: u32, height: u32, labels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 || labels.len() != width as usize * height as usize {
            return Err(Error::InvalidImage(format!(
                "label map {width}x{height} with {} labels",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels: labels.into(),
        })
    }

    pub fn empty(width: u32, height: u32) -> Result<Self> {
        Self::new(width, height, vec![0; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> ObjectIndex {
        self.labels[y as usize * self.width as usize + x as usize] as ObjectIndex
    }

    /// Distinct nonzero indices in ascending order.
    pub fn indices(&self) -> Vec<ObjectIndex> {
        self.areas().into_keys().collect()
    }

    /// Pixel count per nonzero index.
    pub fn areas(&self) -> BTreeMap<ObjectIndex, usize> {
        let mut areas = BTreeMap::new();
        for &l in self.labels.iter() {
            if l != 0 {
                *areas.entry(l as ObjectIndex).or_insert(0) += 1;
            }
        }
        areas
    }

    pub fn contains(&self, index: ObjectIndex) -> bool {
        index != 0 && self.labels.iter().any(|&l| l as ObjectIndex == index)
    }

    /// Copy in which every label not accepted by `keep` becomes 0.
    pub fn retain(&self, keep: impl Fn(ObjectIndex) -> bool) -> LabelMap {
        let labels: Vec<u16> = self
            .labels
            .iter()
            .map(|&l| if l != 0 && keep(l as ObjectIndex) { l } else { 0 })
            .collect();
        LabelMap {
            width: self.width,
            height: self.height,
            labels: labels.into(),
        }
    }

    pub fn check_dimensions(&self, dims: (u32, u32)) -> Result<()> {
        if self.dimensions() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                actual: self.dimensions(),
            });
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.width.to_le_bytes());
        hasher.update(self.height.to_le_bytes());
        for l in self.labels.iter() {
            hasher.update(l.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Decodes a single-channel PNG (8- or 16-bit) whose values are object indices.
    pub fn decode_png(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
            .map_err(|e| Error::InvalidImage(e.to_string()))?;
        let gray = match img {
            image::DynamicImage::ImageLuma16(g) => g,
            image::DynamicImage::ImageLuma8(g) => {
                let (w, h) = g.dimensions();
                RawImage::from_raw(w, h, g.into_raw().into_iter().map(u16::from).collect())
                    .expect("same dimensions")
            }
            other => {
                return Err(Error::InvalidImage(format!(
                    "label map must be single-channel, got {:?}",
                    other.color()
                )))
            }
        };
        let (w, h) = gray.dimensions();
        Self::new(w, h, gray.into_raw())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let unreadable = |reason: String| Error::UnreadableFile {
            path: path.display().to_string(),
            reason,
        };
        let bytes = std::fs::read(path).map_err(|e| unreadable(e.to_string()))?;
        Self::decode_png(&bytes).map_err(|e| unreadable(e.to_string()))
    }

    pub fn encode_png(&self) -> Vec<u8> {
        let img: RawImage<Luma<u16>, Vec<u16>> =
            RawImage::from_raw(self.width, self.height, self.labels.to_vec())
                .expect("label length matches dimensions");
        let mut out = Cursor::new(Vec::new());
        img.write_to(&mut out, ImageFormat::Png)
            .expect("in-memory png encoding");
        out.into_inner()
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.encode_png())?;
        Ok(())
    }
}

/// Inclusive pixel bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl BBox {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0 + 1
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Grows by `by` on every side, clipped to `(width, height)`.
    pub fn inflate(&self, by: u32, width: u32, height: u32) -> BBox {
        BBox {
            x0: self.x0.saturating_sub(by),
            y0: self.y0.saturating_sub(by),
            x1: (self.x1 + by).min(width - 1),
            y1: (self.y1 + by).min(height - 1),
        }
    }
}

/// Per-object view over a label map: full-frame bitmap plus bounds and centroid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskRegion {
    object_index: ObjectIndex,
    width: u32,
    height: u32,
    bitmap: Arc<[bool]>,
    bbox: BBox,
    centroid: (u32, u32),
}

impl MaskRegion {
    /// Builds a mask from a full-frame bitmap. Fails with `EmptyMask` when no pixel is set.
    pub fn from_bitmap(
        object_index: ObjectIndex,
        width: u32,
        height: u32,
        bitmap: Vec<bool>,
    ) -> Result<Self> {
        if bitmap.len() != width as usize * height as usize {
            return Err(Error::InvalidImage("bitmap length mismatch".into()));
        }
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
        for (i, _) in bitmap.iter().enumerate().filter(|(_, &b)| b) {
            let x = (i % width as usize) as u32;
            let y = (i / width as usize) as u32;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            sx += x as u64;
            sy += y as u64;
            n += 1;
        }
        if n == 0 {
            return Err(Error::EmptyMask);
        }
        let centroid = (
            (sx as f64 / n as f64).round() as u32,
            (sy as f64 / n as f64).round() as u32,
        );
        Ok(Self {
            object_index,
            width,
            height,
            bitmap: bitmap.into(),
            bbox: BBox { x0, y0, x1, y1 },
            centroid,
        })
    }

    pub fn object_index(&self) -> ObjectIndex {
        self.object_index
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bitmap(&self) -> &[bool] {
        &self.bitmap
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    pub fn centroid(&self) -> (u32, u32) {
        self.centroid
    }

    #[inline]
    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.bitmap[y as usize * self.width as usize + x as usize]
    }

    pub fn area(&self) -> usize {
        self.bitmap.iter().filter(|&&b| b).count()
    }

    pub fn covers_everything(&self) -> bool {
        self.bitmap.iter().all(|&b| b)
    }
}

pub fn mask_from_label(map: &LabelMap, index: ObjectIndex) -> Result<MaskRegion> {
    if index == 0 || index > u16::MAX as ObjectIndex {
        return Err(Error::UnknownObjectIndex(index));
    }
    let bitmap: Vec<bool> = map.labels().iter().map(|&l| l as ObjectIndex == index).collect();
    MaskRegion::from_bitmap(index, map.width(), map.height(), bitmap).map_err(|e| match e {
        Error::EmptyMask => Error::UnknownObjectIndex(index),
        other => other,
    })
}

/// Offsets of the Euclidean disc `dx² + dy² ≤ radius²`.
pub fn disc_offsets(radius: u32) -> Vec<(i32, i32)> {
    let r = radius as i32;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Morphological dilation with a Euclidean disc, clipped to the image.
/// Radius 1 yields the 4-neighbour plus shape.
pub fn dilate_mask(mask: &MaskRegion, radius: u32) -> MaskRegion {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = (mask.width as i32, mask.height as i32);
    let offsets = disc_offsets(radius);
    let mut out = vec![false; mask.bitmap.len()];
    let b = mask.bbox;
    for y in b.y0..=b.y1 {
        for x in b.x0..=b.x1 {
            if !mask.contains(x, y) {
                continue;
            }
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x as i32 + dx, y as i32 + dy);
                if nx >= 0 && ny >= 0 && nx < w && ny < h {
                    out[(ny * w + nx) as usize] = true;
                }
            }
        }
    }
    MaskRegion::from_bitmap(mask.object_index, mask.width, mask.height, out)
        .expect("dilation of a nonempty mask is nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_with(w: u32, h: u32, cells: &[(u32, u32, u16)]) -> LabelMap {
        let mut labels = vec![0u16; (w * h) as usize];
        for &(x, y, l) in cells {
            labels[(y * w + x) as usize] = l;
        }
        LabelMap::new(w, h, labels).unwrap()
    }

    #[test]
    fn one_pixel_mask() {
        let map = map_with(8, 8, &[(3, 4, 1)]);
        let m = mask_from_label(&map, 1).unwrap();
        assert_eq!(m.bbox(), BBox { x0: 3, y0: 4, x1: 3, y1: 4 });
        assert_eq!(m.centroid(), (3, 4));
    }

    #[test]
    fn full_frame_mask() {
        let map = LabelMap::new(5, 4, vec![2; 20]).unwrap();
        let m = mask_from_label(&map, 2).unwrap();
        assert_eq!(m.bbox(), BBox { x0: 0, y0: 0, x1: 4, y1: 3 });
        assert!(m.covers_everything());
    }

    #[test]
    fn l_shape_centroid_matches_enumeration() {
        let mut cells = vec![];
        for y in 0..6 {
            cells.push((1, y, 3));
        }
        for x in 2..7 {
            cells.push((x, 5, 3));
        }
        let map = map_with(9, 9, &cells);
        let m = mask_from_label(&map, 3).unwrap();
        let n = cells.len() as f64;
        let mx = cells.iter().map(|c| c.0 as f64).sum::<f64>() / n;
        let my = cells.iter().map(|c| c.1 as f64).sum::<f64>() / n;
        assert_eq!(m.centroid(), (mx.round() as u32, my.round() as u32));
        assert_eq!(m.area(), cells.len());
    }

    #[test]
    fn absent_index_is_unknown() {
        let map = map_with(4, 4, &[(0, 0, 1)]);
        assert!(matches!(mask_from_label(&map, 2), Err(Error::UnknownObjectIndex(2))));
        assert!(matches!(mask_from_label(&map, 0), Err(Error::UnknownObjectIndex(0))));
    }

    #[test]
    fn radius_one_is_plus_shape() {
        let map = map_with(5, 5, &[(2, 2, 1)]);
        let d = dilate_mask(&mask_from_label(&map, 1).unwrap(), 1);
        assert_eq!(d.area(), 5);
        for (x, y) in [(2, 2), (1, 2), (3, 2), (2, 1), (2, 3)] {
            assert!(d.contains(x, y));
        }
        assert!(!d.contains(1, 1));
    }

    #[test]
    fn radius_zero_is_identity() {
        let map = map_with(5, 5, &[(2, 2, 1), (3, 2, 1)]);
        let m = mask_from_label(&map, 1).unwrap();
        assert_eq!(dilate_mask(&m, 0), m);
    }

    #[test]
    fn dilation_matches_distance_oracle() {
        let cells = [(2, 3, 1), (3, 3, 1), (10, 12, 1), (15, 1, 1), (0, 15, 1)];
        let map = map_with(16, 16, &cells);
        let m = mask_from_label(&map, 1).unwrap();
        let d = dilate_mask(&m, 3);
        for y in 0..16u32 {
            for x in 0..16u32 {
                let near = cells.iter().any(|&(cx, cy, _)| {
                    let dx = x as i64 - cx as i64;
                    let dy = y as i64 - cy as i64;
                    dx * dx + dy * dy <= 9
                });
                assert_eq!(d.contains(x, y), near, "({x},{y})");
            }
        }
    }

    #[test]
    fn label_png_round_trip() {
        let map = map_with(6, 3, &[(0, 0, 1), (5, 2, 300)]);
        let back = LabelMap::decode_png(&map.encode_png()).unwrap();
        assert_eq!(map, back);
        assert_eq!(back.indices(), vec![1, 300]);
    }

    #[test]
    fn retain_drops_labels() {
        let map = map_with(3, 1, &[(0, 0, 1), (1, 0, 2), (2, 0, 3)]);
        assert_eq!(map.retain(|i| i != 2).indices(), vec![1, 3]);
    }
}
