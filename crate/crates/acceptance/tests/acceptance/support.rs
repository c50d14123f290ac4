use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veriloop_core::image::{ImageBuffer, LabelMap};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise(rng: &mut impl Rng, w: u32, h: u32) -> ImageBuffer {
    let data = (0..w * h * 3).map(|_| rng.random()).collect();
    ImageBuffer::from_raw(w, h, data).unwrap()
}

/// Up to `n` axis-aligned boxes and rings; later shapes overwrite earlier ones.
pub fn shapes(rng: &mut impl Rng, w: u32, h: u32, n: u16) -> LabelMap {
    let mut data = vec![0u16; (w * h) as usize];
    for idx in 1..=n {
        let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
        let (x1, y1) = ((x0 + rng.random_range(1..=w / 2 + 1)).min(w), (y0 + rng.random_range(1..=h / 2 + 1)).min(h));
        let ring = rng.random_bool(0.3);
        for y in y0..y1 {
            for x in x0..x1 {
                let edge = x == x0 || y == y0 || x + 1 == x1 || y + 1 == y1;
                if !ring || edge {
                    data[(y * w + x) as usize] = idx;
                }
            }
        }
    }
    LabelMap::new(w, h, data).unwrap()
}

pub fn mask_of(labels: &LabelMap, index: u32) -> Vec<bool> {
    labels.labels().iter().map(|&l| u32::from(l) == index).collect()
}

/// Hexcone RGB to HSV with hue in degrees and s, v in 0..=1.
pub fn hsv(p: [u8; 3]) -> (f64, f64, f64) {
    let [r, g, b] = p.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    (h, s, max)
}

pub fn load_scene(name: &str) -> (ImageBuffer, LabelMap) {
    let dir = fixtures().join(name);
    (
        ImageBuffer::load(dir.join("image.png")).unwrap(),
        LabelMap::load(dir.join("labels.png")).unwrap(),
    )
}

pub fn mock(name: &str) -> Arc<dyn veriloop_core::backend::VisionBackend> {
    Arc::new(veriloop_core::backend::ScriptedMock::load(fixtures().join(name).join("mock.json")).unwrap())
}
