use thiserror::Error;

use crate::driver::Transcript;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing substitution for placeholder {0}")]
    MissingPlaceholder(&'static str),
    #[error("{0}")]
    UnexpectedInput(String),
    #[error("unknown prompt strategy {0:?}")]
    UnknownStrategy(String),
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("credential variable {0} is not set")]
    MissingCredential(String),
    #[error("chat request failed after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("chat endpoint returned {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed chat response: {0}")]
    BadResponse(String),
    #[error("no HTML found in the model reply")]
    EmptyExtraction { transcript: Box<Transcript> },
    #[error("renderer failed: {message}\n{output}")]
    Render { message: String, output: String },
    #[error("renderer did not produce the {artifact} artifact\n{output}")]
    RenderMissing { artifact: &'static str, output: String },
    #[error(transparent)]
    Core(#[from] mrweb_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
