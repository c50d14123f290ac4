use serde::{Deserialize, Serialize};

use super::buffer::Rgb;

/// Hexcone HSV. Hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorHsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

impl ColorHsv {
    pub fn new(h: f64, s: f64, v: f64) -> Self {
        Self {
            h: h.rem_euclid(360.0),
            s: s.clamp(0.0, 1.0),
            v: v.clamp(0.0, 1.0),
        }
    }

    pub fn is_chromatic(&self, threshold: f64) -> bool {
        self.s >= threshold
    }
}

pub fn rgb_to_hsv(c: Rgb) -> ColorHsv {
    let r = c[0] as f64 / 255.0;
    let g = c[1] as f64 / 255.0;
    let b = c[2] as f64 / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    // achromatic pixels get the canonical hue 0
    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    ColorHsv {
        h: if h >= 360.0 { h - 360.0 } else { h },
        s,
        v: max,
    }
}

pub fn hsv_to_rgb(c: ColorHsv) -> Rgb {
    let h = c.h.rem_euclid(360.0) / 60.0;
    let s = c.s.clamp(0.0, 1.0);
    let v = c.v.clamp(0.0, 1.0);
    let sector = (h.floor() as i64).rem_euclid(6);
    let f = h - h.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [to_u8(r), to_u8(g), to_u8(b)]
}

#[inline]
fn to_u8(x: f64) -> u8 {
    (x * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Smallest absolute angular difference in degrees.
pub fn hue_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primaries() {
        let red = rgb_to_hsv([255, 0, 0]);
        assert_eq!((red.h, red.s, red.v), (0.0, 1.0, 1.0));
        let blue = rgb_to_hsv([0, 0, 255]);
        assert_eq!((blue.h, blue.s, blue.v), (240.0, 1.0, 1.0));
        assert_eq!(hsv_to_rgb(ColorHsv::new(120.0, 1.0, 1.0)), [0, 255, 0]);
    }

    #[test]
    fn gray_axis() {
        for h in [0.0, 90.0, 200.0, 359.0] {
            let c = hsv_to_rgb(ColorHsv::new(h, 0.0, 0.5));
            for ch in c {
                assert!((ch as i32 - 128).abs() <= 1, "{c:?}");
            }
        }
        assert_eq!(rgb_to_hsv([77, 77, 77]).h, 0.0);
        assert_eq!(rgb_to_hsv([77, 77, 77]).s, 0.0);
    }

    #[test]
    fn coarse_grid_round_trip() {
        let mut grid: Vec<u8> = (0..16).map(|i| (i * 16) as u8).collect();
        grid.push(255);
        let mut worst = 0;
        for &r in &grid {
            for &g in &grid {
                for &b in &grid {
                    let back = hsv_to_rgb(rgb_to_hsv([r, g, b]));
                    for (a, o) in [r, g, b].iter().zip(back) {
                        worst = worst.max((*a as i32 - o as i32).abs());
                    }
                }
            }
        }
        assert!(worst <= 1, "worst channel error {worst}");
    }

    #[test]
    fn hsv_grid_hue_error_bounded() {
        // hue every 5 degrees, s and v every 0.1; the oracle's worst case on this
        // grid is 1.923 degrees
        let mut worst: f64 = 0.0;
        for hi in (0..360).step_by(5) {
            for si in 0..=10 {
                for vi in 0..=10 {
                    let (s, v) = (si as f64 / 10.0, vi as f64 / 10.0);
                    if s * v < 0.1 - 1e-12 {
                        continue;
                    }
                    let back = rgb_to_hsv(hsv_to_rgb(ColorHsv::new(hi as f64, s, v)));
                    worst = worst.max(hue_distance(back.h, hi as f64));
                }
            }
        }
        assert!(worst <= 2.0, "worst hue error {worst}");
        assert!((worst - 1.923).abs() < 1e-3, "oracle value drifted: {worst}");
    }

    #[test]
    fn hue_distance_wraps() {
        assert_eq!(hue_distance(359.0, 1.0), 2.0);
        assert_eq!(hue_distance(10.0, 350.0), 20.0);
    }
}
