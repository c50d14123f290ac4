use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown object index {0}")]
    UnknownObjectIndex(u32),
    #[error("object {0} is not live")]
    ObjectNotLive(u32),
    #[error("mask is empty")]
    EmptyMask,
    #[error("mask covers the entire image; nothing to fill from")]
    MaskCoversImage,
    #[error("unknown color name `{0}`")]
    UnknownColorName(String),
    #[error("text is empty")]
    EmptyText,
    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("unrecognized action: {message}")]
    UnrecognizedAction { message: String },
    #[error("missing parameter: {0}")]
    MissingParameter(String),
    #[error("reference `{reference}` is ambiguous between objects {candidates:?}")]
    AmbiguousReference {
        reference: String,
        candidates: Vec<u32>,
    },
    #[error("no object matches `{reference}`; nearest candidates {candidates:?}")]
    NoMatchingObject {
        reference: String,
        candidates: Vec<u32>,
    },

    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("backend refused the request (status {status}): {message}")]
    BackendRefused { status: u16, message: String },
    #[error("no scripted response matches {0}")]
    UnmatchedScriptRequest(String),
    #[error("object descriptions response lacks live object {0}")]
    MissingIndexInResponse(u32),
    #[error("request precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("segmentation unavailable: {0}")]
    SegmentationUnavailable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),

    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error("session reached its limit of {0} edits")]
    SessionFull(usize),

    #[error("unreadable file {path}: {reason}")]
    UnreadableFile { path: String, reason: String },
    #[error("missing fixture: {0}")]
    MissingFixture(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name, used in problem responses and transcripts.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownObjectIndex(_) => "UnknownObjectIndex",
            Error::ObjectNotLive(_) => "ObjectNotLive",
            Error::EmptyMask => "EmptyMask",
            Error::MaskCoversImage => "MaskCoversImage",
            Error::UnknownColorName(_) => "UnknownColorName",
            Error::EmptyText => "EmptyText",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::InvalidImage(_) => "InvalidImage",
            Error::EmptyPrompt => "EmptyPrompt",
            Error::UnrecognizedAction { .. } => "UnrecognizedAction",
            Error::MissingParameter(_) => "MissingParameter",
            Error::AmbiguousReference { .. } => "AmbiguousReference",
            Error::NoMatchingObject { .. } => "NoMatchingObject",
            Error::BackendUnavailable(_) => "BackendUnavailable",
            Error::BackendRefused { .. } => "BackendRefused",
            Error::UnmatchedScriptRequest(_) => "UnmatchedScriptRequest",
            Error::MissingIndexInResponse(_) => "MissingIndexInResponse",
            Error::PreconditionViolation(_) => "PreconditionViolation",
            Error::SegmentationUnavailable(_) => "SegmentationUnavailable",
            Error::MalformedResponse(_) => "MalformedResponse",
            Error::NothingToUndo => "NothingToUndo",
            Error::NothingToRedo => "NothingToRedo",
            Error::SessionFull(_) => "SessionFull",
            Error::UnreadableFile { .. } => "UnreadableFile",
            Error::MissingFixture(_) => "MissingFixture",
            Error::Config(_) => "Config",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }

    /// Candidate object indices attached to grounding errors.
    pub fn candidates(&self) -> &[u32] {
        match self {
            Error::AmbiguousReference { candidates, .. }
            | Error::NoMatchingObject { candidates, .. } => candidates,
            _ => &[],
        }
    }

    /// Errors caused by the vision backend rather than by the prompt or the image.
    pub fn is_backend_failure(&self) -> bool {
        matches!(
            self,
            Error::BackendUnavailable(_)
                | Error::BackendRefused { .. }
                | Error::UnmatchedScriptRequest(_)
                | Error::MissingIndexInResponse(_)
                | Error::MalformedResponse(_)
        )
    }
}
