use std::sync::Arc;
use std::time::Duration;

use veriloop_core::backend::{BackendConfig, MockScript, RemoteBackend, ScriptedMock, SyntheticBackend, VisionBackend};
use veriloop_core::edit::{BoundaryFill, InpaintStrategy, RemoteInpainter};
use veriloop_core::segmentation::{RemoteSegmentation, SegmentationProvider};
use veriloop_core::Result;

/// Where sessions get their vision backend, inpainter and segmentation from.
#[derive(Debug, Clone)]
pub enum BackendSource {
    /// Every session gets a fresh copy of the script.
    Mock(MockScript),
    Remote(BackendConfig),
    Synthetic,
}

impl BackendSource {
    pub fn backend(&self) -> Result<Arc<dyn VisionBackend>> {
        Ok(match self {
            BackendSource::Mock(script) => Arc::new(ScriptedMock::new(script.clone())),
            BackendSource::Remote(cfg) => Arc::new(RemoteBackend::new(cfg.clone())?),
            BackendSource::Synthetic => Arc::new(SyntheticBackend),
        })
    }

    pub fn inpainter(&self) -> Arc<dyn InpaintStrategy> {
        match self {
            BackendSource::Remote(BackendConfig {
                inpaint_endpoint: Some(url),
                timeout_secs,
                retries,
                ..
            }) => Arc::new(RemoteInpainter::new(url.clone(), Duration::from_secs(*timeout_secs), *retries)),
            _ => Arc::new(BoundaryFill),
        }
    }

    pub fn segmentation(&self) -> Option<Arc<dyn SegmentationProvider>> {
        match self {
            BackendSource::Remote(BackendConfig {
                segmentation_endpoint: Some(url),
                timeout_secs,
                retries,
                ..
            }) => Some(Arc::new(RemoteSegmentation::new(
                url.clone(),
                Duration::from_secs(*timeout_secs),
                *retries,
            ))),
            _ => None,
        }
    }
}
