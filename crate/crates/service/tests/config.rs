use clap::Parser;
use veriloop_core::router::RoutingMode;
use veriloop_service::{BackendSource, ServeArgs};

#[derive(Debug, Parser)]
struct Cli {
    #[command(flatten)]
    serve: ServeArgs,
}

fn mock_script() -> String {
    format!("{}/../../fixtures/cat/mock.json", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn overrides_reach_the_session_config() {
    let cli = Cli::try_parse_from([
        "x",
        "--mock-script",
        &mock_script(),
        "--blur-min-sigma",
        "2.5",
        "--blur-sigma-divisor",
        "8",
        "--brightness-step",
        "25",
        "--dilation-radius",
        "9",
        "--max-edits",
        "7",
        "--routing",
        "backend-first",
        "--queue-depth",
        "2",
    ])
    .unwrap();
    let config = cli.serve.service_config().unwrap();
    assert!(matches!(config.source, BackendSource::Mock(_)));
    assert_eq!(config.queue_depth, 2);
    let s = config.session;
    assert_eq!(s.edit.blur_min_sigma, 2.5);
    assert_eq!(s.edit.blur_sigma_divisor, 8.0);
    assert_eq!(s.edit.brightness_step, 25);
    assert_eq!(s.edit.dilation_radius, 9);
    assert_eq!(s.max_edits, 7);
    assert_eq!(s.routing, RoutingMode::BackendFirst);
}

#[test]
fn defaults_match_the_library() {
    let cli = Cli::try_parse_from(["x", "--synthetic"]).unwrap();
    let config = cli.serve.service_config().unwrap();
    assert_eq!(config.session, Default::default());
    assert_eq!(config.queue_depth, 4);
    assert!(config.store.is_none());
    assert_eq!(cli.serve.listen, "127.0.0.1:8080");
}

#[test]
fn backend_choice_is_exclusive_and_required() {
    assert!(Cli::try_parse_from(["x", "--synthetic", "--mock-script", "m.json"]).is_err());
    let cli = Cli::try_parse_from(["x"]).unwrap();
    assert!(cli.serve.service_config().is_err());
    let cli = Cli::try_parse_from(["x", "--backend-config", "/nonexistent.toml"]).unwrap();
    assert!(cli.serve.service_config().is_err());
}
