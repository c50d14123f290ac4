use crate::error::{Error, Result};
use crate::image::{BBox, ImageBuffer, MaskRegion};
use crate::par;

use super::EditConfig;

/// Object-relative blur strength: max(min_sigma, longest bbox side / divisor).
pub fn blur_sigma(bbox: BBox, config: &EditConfig) -> f64 {
    let side = bbox.width().max(bbox.height()) as f64;
    config.blur_min_sigma.max(side / config.blur_sigma_divisor)
}

/// Normalized 1-D Gaussian with radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Gaussian blur of the whole image composited back inside `mask`.
/// Borders replicate the edge pixel. Only rows and columns that can reach the
/// mask are actually convolved.
pub fn blur_object(img: &ImageBuffer, mask: &MaskRegion, config: &EditConfig) -> Result<ImageBuffer> {
    if mask.dimensions() != img.dimensions() {
        return Err(Error::DimensionMismatch {
            expected: img.dimensions(),
            actual: mask.dimensions(),
        });
    }
    let sigma = blur_sigma(mask.bbox(), config);
    Ok(convolve_masked(img, mask, &gaussian_kernel(sigma)))
}

pub(crate) fn convolve_masked(img: &ImageBuffer, mask: &MaskRegion, kernel: &[f64]) -> ImageBuffer {
    let (w, h) = img.dimensions();
    let r = (kernel.len() / 2) as i64;
    let b = mask.bbox();
    let ry0 = (b.y0 as i64 - r).max(0) as u32;
    let ry1 = (b.y1 as i64 + r).min(h as i64 - 1) as u32;
    let cols = (b.x1 - b.x0 + 1) as usize;
    let clamp = |v: i64, hi: u32| v.clamp(0, hi as i64 - 1) as u32;

    // horizontal pass for rows ry0..=ry1, columns of the mask bbox
    let horizontal: Vec<Vec<[f64; 3]>> = par::map_range((ry1 - ry0 + 1) as usize, |row| {
        let y = ry0 + row as u32;
        (0..cols)
            .map(|c| {
                let x = b.x0 as i64 + c as i64;
                let mut acc = [0.0; 3];
                for (k, wgt) in kernel.iter().enumerate() {
                    let p = img.get(clamp(x + k as i64 - r, w), y);
                    for ch in 0..3 {
                        acc[ch] += wgt * p[ch] as f64;
                    }
                }
                acc
            })
            .collect()
    });

    let mut out = img.to_vec();
    par::for_each_row(&mut out, w as usize * 3, |y, row| {
        let y = y as u32;
        if y < b.y0 || y > b.y1 {
            return;
        }
        for c in 0..cols {
            let x = b.x0 + c as u32;
            if !mask.contains(x, y) {
                continue;
            }
            let mut acc = [0.0; 3];
            for (k, wgt) in kernel.iter().enumerate() {
                let sy = clamp(y as i64 + k as i64 - r, h);
                let hv = &horizontal[(sy - ry0) as usize][c];
                for ch in 0..3 {
                    acc[ch] += wgt * hv[ch];
                }
            }
            let i = x as usize * 3;
            for ch in 0..3 {
                row[i + ch] = acc[ch].round().clamp(0.0, 255.0) as u8;
            }
        }
    });
    ImageBuffer::from_raw(w, h, out).expect("same dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{mask_from_label, LabelMap};

    fn rect_mask(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> MaskRegion {
        let labels = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                (x >= x0 && x <= x1 && y >= y0 && y <= y1) as u16
            })
            .collect();
        mask_from_label(&LabelMap::new(w, h, labels).unwrap(), 1).unwrap()
    }

    #[test]
    fn sigma_rule() {
        let cfg = EditConfig::default();
        let small = BBox { x0: 0, y0: 0, x1: 9, y1: 9 };
        let big = BBox { x0: 0, y0: 0, x1: 159, y1: 79 };
        assert_eq!(blur_sigma(small, &cfg), 3.0);
        assert_eq!(blur_sigma(big, &cfg), 10.0);
        assert_eq!(gaussian_kernel(3.0).len(), 19);
    }

    #[test]
    fn constant_image_is_fixed_point() {
        let img = ImageBuffer::filled(24, 20, [93, 17, 201]).unwrap();
        let m = rect_mask(24, 20, 3, 4, 15, 12);
        assert_eq!(blur_object(&img, &m, &EditConfig::default()).unwrap(), img);
    }

    #[test]
    fn outside_mask_untouched() {
        let img = ImageBuffer::from_fn(30, 30, |x, y| [(x * 8) as u8, (y * 8) as u8, ((x ^ y) * 9) as u8]).unwrap();
        let m = rect_mask(30, 30, 5, 5, 14, 20);
        let out = blur_object(&img, &m, &EditConfig::default()).unwrap();
        for y in 0..30 {
            for x in 0..30 {
                if !m.contains(x, y) {
                    assert_eq!(out.get(x, y), img.get(x, y));
                }
            }
        }
        assert_ne!(out, img);
    }
}
