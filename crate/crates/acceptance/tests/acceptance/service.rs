use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use base64::Engine;
use serde_json::json;
use sha2::{Digest, Sha256};
use veriloop_acceptance::{ensure, Outcome};
use veriloop_core::backend::MockScript;
use veriloop_service::{App, BackendSource, ServiceConfig, SessionSummary};

use crate::support::fixtures;
use crate::walkthrough::PROMPTS;

fn start(store: &Path) -> Result<String, String> {
    let script = MockScript::load(fixtures().join("cat/mock.json")).map_err(|e| e.to_string())?;
    let mut config = ServiceConfig::new(BackendSource::Mock(script));
    config.store = Some(store.to_path_buf());
    let app = App::new(config).map_err(|e| e.to_string())?;
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().enable_all().worker_threads(2).build().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            veriloop_service::serve(Arc::clone(&app), listener).await.unwrap();
        });
    });
    Ok(format!("http://{}", rx.recv().map_err(|e| e.to_string())?))
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

/// Status and body bytes.
fn call(req: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Result<(u16, Vec<u8>), String> {
    let mut r = req.map_err(|e| e.to_string())?;
    let status = r.status().as_u16();
    let body = r.body_mut().with_config().limit(u64::MAX).read_to_vec().map_err(|e| e.to_string())?;
    Ok((status, body))
}

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = start(dir.path())?;
    let a = agent();
    let b64 = |f: &str| base64::engine::general_purpose::STANDARD.encode(std::fs::read(fixtures().join("cat").join(f)).unwrap());
    let upload = json!({ "image": b64("image.png"), "labels": b64("labels.png") });

    let start_time = Instant::now();
    let (status, body) = call(a.post(format!("{base}/sessions")).send_json(upload))?;
    ensure!(status == 201, "create gave {status}");
    let s: SessionSummary = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
    let url = format!("{base}/sessions/{}", s.session_id);
    for p in PROMPTS {
        let (status, body) = call(a.post(format!("{url}/prompts")).send_json(json!({ "text": p })))?;
        ensure!(status == 200, "{p:?} gave {status}: {}", String::from_utf8_lossy(&body));
    }
    for op in ["undo", "redo"] {
        let (status, _) = call(a.post(format!("{url}/{op}")).send_empty())?;
        ensure!(status == 200, "{op} gave {status}");
    }
    let (status, _) = call(a.get(format!("{url}/transcript")).call())?;
    ensure!(status == 200, "transcript gave {status}");
    let elapsed = start_time.elapsed().as_secs_f64();
    ensure!(elapsed < 2.0, "round trip took {elapsed:.2}s");

    let paths = ["", "/chat", "/transcript", "/images/original", "/images/1", "/images/5", "/images/current", "/images/som-current"];
    let mut before = Vec::new();
    for p in paths {
        let (status, body) = call(a.get(format!("{url}{p}")).call())?;
        ensure!(status == 200, "GET {p} gave {status}");
        before.push(sha(&body));
    }
    let listing = sha(&call(a.get(format!("{base}/sessions")).call())?.1);

    let restarted = start(dir.path())?;
    let url2 = format!("{restarted}/sessions/{}", s.session_id);
    for (p, want) in paths.iter().zip(&before) {
        let (status, body) = call(a.get(format!("{url2}{p}")).call())?;
        ensure!(status == 200 && sha(&body) == *want, "GET {p} differs after restart");
    }
    ensure!(sha(&call(a.get(format!("{restarted}/sessions")).call())?.1) == listing, "listing differs after restart");
    Ok(format!("all 2xx in {elapsed:.2}s; {} GET responses identical after restart", paths.len() + 1))
}
