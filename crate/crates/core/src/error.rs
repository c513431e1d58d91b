use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot normalize url {0:?}")]
    Url(String),
    #[error("unknown resource type {0:?}")]
    UnknownKind(String),
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("image {width}x{height} is smaller than the {window}x{window} window")]
    ImageTooSmall { width: u32, height: u32, window: u32 },
    #[error("invalid image: {0}")]
    InvalidImage(String),
    #[error("embedding dimension mismatch: {0} vs {1}")]
    EmbeddingDimension(usize, usize),
    #[error("embedding has zero norm or non-finite values")]
    DegenerateEmbedding,
    #[error("box does not intersect the image")]
    EmptyRegion,
    #[error("{0}")]
    Statistics(String),
    #[error("logistic fit failed: {message}")]
    FitFailed {
        message: String,
        best: Option<crate::iqa::LogisticFit>,
    },
    #[error("geometry dump element {index}: {message}")]
    InvalidDump { index: usize, message: String },
    #[error("page {page}: {source}")]
    Page { page: String, source: Box<Error> },
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
