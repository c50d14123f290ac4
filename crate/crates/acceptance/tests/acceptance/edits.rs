use std::time::Instant;

use rand::Rng;
use veriloop_acceptance::{ensure, Outcome};
use veriloop_core::edit::{
    apply_action, blur_object, BoundaryFill, BrightnessDirection, ColorNameTable, EditAction, EditConfig, TextTarget,
};
use veriloop_core::image::{hsv_to_rgb, mask_from_label, rgb_to_hsv, Anchor, ColorHsv, ImageBuffer, LabelMap};

use crate::support::{hsv, mask_of, noise, rng, shapes};

const PAIRS_PER_ACTION: u64 = 50;

fn action_for(kind: usize, rng: &mut impl Rng) -> EditAction {
    match kind {
        0 => EditAction::Blur,
        1 => {
            let names = ["blue", "red", "green", "yellow", "white", "black"];
            EditAction::change_color(names[rng.random_range(0..names.len())], &ColorNameTable::default()).unwrap()
        }
        2 => EditAction::AdjustBrightness {
            direction: if rng.random_bool(0.5) { BrightnessDirection::Brighter } else { BrightnessDirection::Darker },
        },
        3 => EditAction::Remove,
        _ => {
            let target = match rng.random_range(0..10) {
                9 => TextTarget::Object,
                i => TextTarget::Anchor(Anchor::all()[i]),
            };
            let len = rng.random_range(1..20);
            let text: String = (0..len).map(|_| rng.random_range(b'A'..=b'z') as char).collect();
            EditAction::AddText { text, target }
        }
    }
}

/// Pixels within Euclidean distance `r` of any mask pixel.
fn near(mask: &[bool], w: u32, h: u32, r: i64) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for (i, _) in mask.iter().enumerate().filter(|(_, m)| **m) {
        let (mx, my) = ((i as u32 % w) as i64, (i as u32 / w) as i64);
        for y in (my - r).max(0)..=(my + r).min(h as i64 - 1) {
            for x in (mx - r).max(0)..=(mx + r).min(w as i64 - 1) {
                if (x - mx).pow(2) + (y - my).pow(2) <= r * r {
                    out[(y * w as i64 + x) as usize] = true;
                }
            }
        }
    }
    out
}

pub fn locality() -> Outcome {
    let start = Instant::now();
    let config = EditConfig::default();
    ensure!(config.dilation_radius == 5, "dilation radius is {}", config.dilation_radius);
    let names = ["Blur", "ChangeColor", "AdjustBrightness", "Remove", "AddText"];
    let mut checked = [0u64; 5];
    for (kind, name) in names.iter().enumerate() {
        for seed in 0..PAIRS_PER_ACTION {
            let mut rng = rng(1000 * kind as u64 + seed);
            let (w, h) = (rng.random_range(12..80), rng.random_range(12..80));
            let img = noise(&mut rng, w, h);
            let n = rng.random_range(1..6);
            let labels = shapes(&mut rng, w, h, n);
            let live = labels.indices();
            let object = live[rng.random_range(0..live.len())];
            let action = action_for(kind, &mut rng);
            let mask = mask_of(&labels, object);
            let out = match apply_action(&img, &labels, &action, Some(object), &BoundaryFill, &config) {
                Ok(o) => o,
                Err(veriloop_core::Error::MaskCoversImage) if kind == 3 => {
                    ensure!(near(&mask, w, h, 5).iter().all(|b| *b), "{name} seed {seed}: refused a fillable removal");
                    continue;
                }
                Err(e) => return Err(format!("{name} seed {seed}: {e}")),
            };
            let region = match kind {
                3 => near(&mask, w, h, 5),
                4 => {
                    let b = out.placement.as_ref().ok_or("text edit without placement")?.bbox;
                    (0..w * h)
                        .map(|i| {
                            let (x, y) = (i % w, i / w);
                            x + 1 >= b.x0 && x <= b.x1 + 1 && y + 1 >= b.y0 && y <= b.y1 + 1
                        })
                        .collect()
                }
                _ => mask,
            };
            for (i, allowed) in region.iter().enumerate() {
                ensure!(
                    *allowed || img.get_index(i) == out.image.get_index(i),
                    "{name} seed {seed}: pixel {i} changed outside its write region"
                );
            }
            checked[kind] += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1}s");
    ensure!(checked.iter().all(|&c| c >= PAIRS_PER_ACTION - 2), "too few pairs checked: {checked:?}");
    Ok(format!("{checked:?} pairs for {names:?}, zero pixels outside"))
}

pub fn brightness() -> Outcome {
    let mut r = rng(7);
    let img = noise(&mut r, 64, 64);
    let labels = shapes(&mut r, 64, 64, 3);
    let mut pixels = 0;
    for object in labels.indices() {
        let mask = mask_of(&labels, object);
        for (direction, sign) in [(BrightnessDirection::Brighter, 1), (BrightnessDirection::Darker, -1)] {
            let out = apply_action(
                &img,
                &labels,
                &EditAction::AdjustBrightness { direction },
                Some(object),
                &BoundaryFill,
                &EditConfig::default(),
            )
            .map_err(|e| e.to_string())?;
            for (i, (a, b)) in img.as_raw().iter().zip(out.image.as_raw()).enumerate() {
                let expected = if mask[i / 3] { (*a as i32 + sign * 40).clamp(0, 255) } else { *a as i32 };
                ensure!(*b as i32 == expected, "object {object} channel {i}: {a} -> {b}, expected {expected}");
                pixels += 1;
            }
        }
    }
    Ok(format!("{pixels} channel values exact"))
}

pub fn hue_rewrite() -> Outcome {
    let blue = ColorNameTable::default().resolve("blue").map_err(|e| e.to_string())?;
    let mut worst_hue: f64 = 0.0;
    let mut worst_v: f64 = 0.0;
    let mut counted = 0;
    for seed in 0..20 {
        let mut r = rng(300 + seed);
        let (w, h) = (48, 40);
        let data = (0..w * h)
            .flat_map(|_| {
                let c = ColorHsv::new(r.random_range(0.0..360.0), r.random_range(0.6..=1.0), r.random_range(0.2..=1.0));
                hsv_to_rgb(c)
            })
            .collect();
        let img = ImageBuffer::from_raw(w, h, data).unwrap();
        let labels = shapes(&mut r, w, h, 1);
        let out = apply_action(
            &img,
            &labels,
            &EditAction::ChangeColor { color: "blue".into(), target: blue },
            Some(1),
            &BoundaryFill,
            &EditConfig::default(),
        )
        .map_err(|e| e.to_string())?;
        for (i, m) in mask_of(&labels, 1).iter().enumerate() {
            if !m {
                continue;
            }
            let (_, _, v0) = hsv(img.get_index(i));
            let (h1, s1, v1) = hsv(out.image.get_index(i));
            worst_v = worst_v.max((v0 - v1).abs() * 255.0);
            if s1 * v1 >= 0.1 {
                let d = (h1 - 240.0).abs();
                worst_hue = worst_hue.max(d.min(360.0 - d));
                counted += 1;
            }
        }
    }
    ensure!(worst_hue <= 2.0, "hue off by {worst_hue:.3} degrees");
    ensure!(worst_v <= 1.0 + 1e-9, "value drifted by {worst_v:.3} levels");
    ensure!(counted > 0, "no pixel qualified");
    Ok(format!("{counted} pixels, max hue error {worst_hue:.3} deg, max V drift {worst_v:.3}"))
}

/// Weighted sum over the full (2r+1)^2 window with replicated borders.
fn convolve(img: &ImageBuffer, mask: &[bool], sigma: f64) -> Vec<u8> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let r = (3.0 * sigma).ceil() as i64;
    let weight = |dx: i64, dy: i64| (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
    let mut total = 0.0;
    for dy in -r..=r {
        for dx in -r..=r {
            total += weight(dx, dy);
        }
    }
    let mut out = img.as_raw().to_vec();
    for y in 0..h {
        for x in 0..w {
            if !mask[(y * w + x) as usize] {
                continue;
            }
            let mut acc = [0.0f64; 3];
            for dy in -r..=r {
                for dx in -r..=r {
                    let p = img.get((x + dx).clamp(0, w - 1) as u32, (y + dy).clamp(0, h - 1) as u32);
                    let k = weight(dx, dy) / total;
                    for c in 0..3 {
                        acc[c] += k * p[c] as f64;
                    }
                }
            }
            for c in 0..3 {
                out[(3 * (y * w + x)) as usize + c] = acc[c].round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    out
}

fn laplacian_variance(img: &ImageBuffer) -> f64 {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let luma = |x: i64, y: i64| {
        let p = img.get(x as u32, y as u32);
        0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
    };
    let mut vals = Vec::new();
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            vals.push(luma(x - 1, y) + luma(x + 1, y) + luma(x, y - 1) + luma(x, y + 1) - 4.0 * luma(x, y));
        }
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64
}

pub fn blur() -> Outcome {
    let config = EditConfig::default();
    let mut worst = 0;
    for seed in 0..12 {
        let mut r = rng(500 + seed);
        let img = noise(&mut r, 32, 32);
        let labels = shapes(&mut r, 32, 32, 1);
        let mask = mask_from_label(&labels, 1).map_err(|e| e.to_string())?;
        let b = mask.bbox();
        let sigma = (b.width().max(b.height()) as f64 / 16.0).max(3.0);
        let expected = convolve(&img, &mask_of(&labels, 1), sigma);
        let got = blur_object(&img, &mask, &config).map_err(|e| e.to_string())?;
        for (a, b) in expected.iter().zip(got.as_raw()) {
            worst = worst.max((*a as i32 - *b as i32).abs());
        }
    }
    ensure!(worst <= 1, "max difference from the direct convolution is {worst}");

    // Rounding to 8 bits adds independent noise the blur cannot remove; this
    // is its Laplacian variance for the luma weights above.
    let floor = 20.0 * (0.299f64.powi(2) + 0.587f64.powi(2) + 0.114f64.powi(2)) / 12.0;
    let full = LabelMap::new(32, 32, vec![1; 32 * 32]).unwrap();
    let mask = mask_from_label(&full, 1).map_err(|e| e.to_string())?;
    let mut series = Vec::new();
    for seed in 0..8 {
        let mut img = noise(&mut rng(900 + seed), 32, 32);
        let mut last = laplacian_variance(&img);
        series.push(last);
        for step in 0..5 {
            img = blur_object(&img, &mask, &config).map_err(|e| e.to_string())?;
            let v = laplacian_variance(&img);
            ensure!(v <= last + floor, "seed {seed} pass {}: variance {last:.3} -> {v:.3}", step + 1);
            last = v;
            if seed == 0 {
                series.push(v);
            }
        }
    }
    let shown: Vec<String> = series.iter().take(6).map(|v| format!("{v:.2}")).collect();
    Ok(format!("max diff {worst}; variance over 5 passes {}", shown.join(" -> ")))
}

pub fn color_round_trip() -> Outcome {
    let levels: Vec<u8> = (0..16).map(|i| i * 17).collect();
    let mut n = 0;
    for &r in &levels {
        for &g in &levels {
            for &b in &levels {
                let back = hsv_to_rgb(rgb_to_hsv([r, g, b]));
                for (x, y) in [r, g, b].iter().zip(back) {
                    ensure!((*x as i32 - y as i32).abs() <= 1, "{:?} came back as {back:?}", [r, g, b]);
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} grid colors within 1 level"))
}
