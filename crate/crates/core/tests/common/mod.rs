#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veriloop_core::backend::{ScriptedMock, VisionBackend};
use veriloop_core::image::{ImageBuffer, LabelMap};
use veriloop_core::registry::ObjectRegistry;
use veriloop_core::session::SessionTranscript;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub struct Fixture {
    pub image: ImageBuffer,
    pub labels: LabelMap,
    pub transcript: SessionTranscript,
}

impl Fixture {
    pub fn load(name: &str) -> Fixture {
        let dir = fixtures().join(name);
        Fixture {
            image: ImageBuffer::load(dir.join("image.png")).unwrap(),
            labels: LabelMap::load(dir.join("labels.png")).unwrap(),
            transcript: SessionTranscript::load(dir.join("transcript.json")).unwrap(),
        }
    }

    pub fn mock(name: &str) -> Arc<dyn VisionBackend> {
        Arc::new(ScriptedMock::load(fixtures().join(name).join("mock.json")).unwrap())
    }
}

pub fn scene_registry(name: &str) -> Option<ObjectRegistry> {
    let path = fixtures().join(name).join("transcript.json");
    SessionTranscript::load(path).ok().map(|t| t.initial.registry())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, w: u32, h: u32) -> ImageBuffer {
    let data = (0..w * h * 3).map(|_| rng.random()).collect();
    ImageBuffer::from_raw(w, h, data).unwrap()
}

/// A few random rectangles and discs painted in order, so later shapes cover earlier ones.
pub fn random_labels(rng: &mut impl Rng, w: u32, h: u32, objects: u16) -> LabelMap {
    let mut labels = vec![0u16; (w * h) as usize];
    for idx in 1..=objects {
        let cx = rng.random_range(0..w) as i64;
        let cy = rng.random_range(0..h) as i64;
        let rx = rng.random_range(1..=(w / 3).max(1)) as i64;
        let ry = rng.random_range(1..=(h / 3).max(1)) as i64;
        let disc = rng.random_bool(0.5);
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let (dx, dy) = (x - cx, y - cy);
                let inside = if disc {
                    dx * dx * ry * ry + dy * dy * rx * rx <= rx * rx * ry * ry
                } else {
                    dx.abs() <= rx && dy.abs() <= ry
                };
                if inside {
                    labels[(y * w as i64 + x) as usize] = idx;
                }
            }
        }
    }
    LabelMap::new(w, h, labels).unwrap()
}

/// Serves `app` on an ephemeral local port from a background runtime and returns its base URL.
pub fn serve(app: axum::Router) -> String {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().enable_all().worker_threads(2).build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    format!("http://{}", rx.recv().unwrap())
}
