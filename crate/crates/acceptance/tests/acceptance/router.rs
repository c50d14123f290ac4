use veriloop_acceptance::{ensure, Outcome};
use veriloop_core::router::corpus::{evaluate, Corpus};
use veriloop_core::router::Router;
use veriloop_core::session::SessionTranscript;
use veriloop_core::Error;

use crate::support::fixtures;

fn scene(name: &str) -> Option<veriloop_core::registry::ObjectRegistry> {
    SessionTranscript::load(fixtures().join(name).join("transcript.json"))
        .ok()
        .map(|t| t.initial.registry())
}

pub fn corpus() -> Outcome {
    let c = Corpus::load(fixtures().join("router_corpus.json")).map_err(|e| e.to_string())?;
    ensure!(c.prompts.len() == 30, "corpus has {} prompts", c.prompts.len());
    let router = Router::default();
    let report = evaluate(&router, &c, &scene).map_err(|e| e.to_string())?;
    let class = report.classification_accuracy();
    let intent = report.intent_accuracy();
    let misses: Vec<String> = report.failures().map(|f| format!("{:?} -> {}", f.prompt, f.got)).collect();
    ensure!(class == 1.0, "classification {class:.3}; misses {misses:?}");
    ensure!(intent >= 0.9, "intent {intent:.3}; misses {misses:?}");

    let bath = scene("bath").ok_or("bath scene missing")?;
    match router.parse_edit_intent("Remove the pill bottle from this image", &bath) {
        Err(Error::NoMatchingObject { .. }) => {}
        other => return Err(format!("pill bottle gave {other:?}")),
    }
    let cat = scene("cat").ok_or("cat scene missing")?;
    let tie = router
        .parse_edit_intent("change the color of the cat's bow tie from red to blue", &cat)
        .map_err(|e| e.to_string())?;
    ensure!(tie.resolved_index == Some(8), "bow tie prompt grounded on {:?}", tie.resolved_index);
    Ok(format!(
        "classification {:.0}%, intent {:.1}% ({} miss: {})",
        class * 100.0,
        intent * 100.0,
        misses.len(),
        misses.join("; ")
    ))
}
