//! Edit kernels on a 1024x768 frame, run inside a one-thread rayon pool and
//! inside the default pool. Built without the `parallel` feature both columns
//! run the sequential code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veriloop_core::edit::{
    adjust_brightness, blur_object, change_color, BrightnessDirection, ColorNameTable, EditConfig,
};
use veriloop_core::image::{mask_from_label, ImageBuffer, LabelMap, MaskRegion};

const W: u32 = 1024;
const H: u32 = 768;

fn scene() -> (ImageBuffer, MaskRegion) {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let data = (0..W * H * 3).map(|_| rng.random()).collect();
    let img = ImageBuffer::from_raw(W, H, data).unwrap();
    let (cx, cy, r) = (W as i64 / 2, H as i64 / 2, 300i64);
    let labels = (0..W * H)
        .map(|i| {
            let (x, y) = ((i % W) as i64, (i / W) as i64);
            u16::from((x - cx).pow(2) + (y - cy).pow(2) <= r * r)
        })
        .collect();
    let map = LabelMap::new(W, H, labels).unwrap();
    let mask = mask_from_label(&map, 1).unwrap();
    (img, mask)
}

fn edit_ops(c: &mut Criterion) {
    let (img, mask) = scene();
    let config = EditConfig::default();
    let blue = ColorNameTable::default().resolve("blue").unwrap();
    let pools = [
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("parallel", rayon::ThreadPoolBuilder::new().build().unwrap()),
    ];

    let mut group = c.benchmark_group("edit_ops");
    group.sample_size(10);
    for (label, pool) in &pools {
        group.bench_with_input(BenchmarkId::new("blur", label), pool, |b, pool| {
            b.iter(|| pool.install(|| blur_object(&img, &mask, &config).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("recolor", label), pool, |b, pool| {
            b.iter(|| pool.install(|| change_color(&img, &mask, blue).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("brightness", label), pool, |b, pool| {
            b.iter(|| pool.install(|| adjust_brightness(&img, &mask, BrightnessDirection::Brighter, 40).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, edit_ops);
criterion_main!(benches);
