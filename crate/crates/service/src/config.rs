use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use veriloop_core::backend::{BackendConfig, MockScript};
use veriloop_core::router::RoutingMode;
use veriloop_core::session::SessionConfig;

use crate::backends::BackendSource;

pub const DEFAULT_QUEUE_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RoutingArg {
    Rules,
    BackendFirst,
}

impl From<RoutingArg> for RoutingMode {
    fn from(r: RoutingArg) -> Self {
        match r {
            RoutingArg::Rules => RoutingMode::Rules,
            RoutingArg::BackendFirst => RoutingMode::BackendFirst,
        }
    }
}

/// Which vision backend to talk to. Exactly one source may be chosen.
#[derive(Debug, Clone, Default, Args)]
pub struct BackendArgs {
    /// TOML file describing a chat-completions endpoint.
    #[arg(long, env = "VERILOOP_BACKEND_CONFIG", conflicts_with_all = ["mock_script", "synthetic"])]
    pub backend_config: Option<PathBuf>,
    /// Scripted mock responses (JSON).
    #[arg(long, env = "VERILOOP_MOCK_SCRIPT", conflicts_with = "synthetic")]
    pub mock_script: Option<PathBuf>,
    /// Offline backend that derives answers from image statistics.
    #[arg(long)]
    pub synthetic: bool,
}

impl BackendArgs {
    pub fn source(&self) -> anyhow::Result<BackendSource> {
        if let Some(path) = &self.backend_config {
            let cfg = BackendConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
            return Ok(BackendSource::Remote(cfg));
        }
        if let Some(path) = &self.mock_script {
            let script = MockScript::load(path).with_context(|| format!("loading {}", path.display()))?;
            return Ok(BackendSource::Mock(script));
        }
        if self.synthetic {
            return Ok(BackendSource::Synthetic);
        }
        bail!("choose a backend with --backend-config, --mock-script or --synthetic")
    }
}

/// Overrides for edit and session parameters.
#[derive(Debug, Clone, Default, Args)]
pub struct EditArgs {
    /// Lower bound on the blur sigma.
    #[arg(long, env = "VERILOOP_BLUR_MIN_SIGMA")]
    pub blur_min_sigma: Option<f64>,
    /// Sigma is the shorter mask side divided by this.
    #[arg(long, env = "VERILOOP_BLUR_SIGMA_DIVISOR")]
    pub blur_sigma_divisor: Option<f64>,
    /// Value-channel step for brighter and darker.
    #[arg(long, env = "VERILOOP_BRIGHTNESS_STEP")]
    pub brightness_step: Option<u8>,
    /// Dilation radius for object removal, in pixels.
    #[arg(long, env = "VERILOOP_DILATION_RADIUS")]
    pub dilation_radius: Option<u32>,
    #[arg(long, env = "VERILOOP_MAX_EDITS")]
    pub max_edits: Option<usize>,
    #[arg(long, value_enum, env = "VERILOOP_ROUTING")]
    pub routing: Option<RoutingArg>,
}

impl EditArgs {
    pub fn session_config(&self) -> SessionConfig {
        let mut c = SessionConfig::default();
        if let Some(v) = self.blur_min_sigma {
            c.edit.blur_min_sigma = v;
        }
        if let Some(v) = self.blur_sigma_divisor {
            c.edit.blur_sigma_divisor = v;
        }
        if let Some(v) = self.brightness_step {
            c.edit.brightness_step = v;
        }
        if let Some(v) = self.dilation_radius {
            c.edit.dilation_radius = v;
        }
        if let Some(v) = self.max_edits {
            c.max_edits = v;
        }
        if let Some(r) = self.routing {
            c.routing = r.into();
        }
        c
    }
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, env = "VERILOOP_LISTEN", default_value = "127.0.0.1:8080")]
    pub listen: String,
    /// Session store directory; sessions are kept in memory only when absent.
    #[arg(long, env = "VERILOOP_STORE")]
    pub store: Option<PathBuf>,
    /// Prompts allowed to wait behind the running one, per session.
    #[arg(long, env = "VERILOOP_QUEUE_DEPTH", default_value_t = DEFAULT_QUEUE_DEPTH)]
    pub queue_depth: usize,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub edit: EditArgs,
}

impl ServeArgs {
    pub fn service_config(&self) -> anyhow::Result<crate::ServiceConfig> {
        Ok(crate::ServiceConfig {
            source: self.backend.source()?,
            session: self.edit.session_config(),
            store: self.store.clone(),
            queue_depth: self.queue_depth,
        })
    }
}
