//! Object-level image editing driven by natural-language prompts, with
//! four-part textual verification after every edit.

pub mod backend;
pub mod edit;
pub mod feedback;
pub mod error;
mod http;
pub mod image;
mod par;
pub mod registry;
pub mod router;
pub mod segmentation;
pub mod session;

pub use error::{Error, Result};
pub use http::{HttpClient, HttpReply};
