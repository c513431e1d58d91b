//! Generation driver: prompt templates, chat-completion calls, the
//! self-refine loop and the external renderer.

pub mod chat;
pub mod driver;
pub mod error;
pub mod extract;
pub mod prompt;
pub mod render;

pub use chat::{ChatBackend, ChatMessage, ContentPart, HttpChat, RetryPolicy};
pub use driver::{generate_page, GenerationConfig, GenerationInputs, GenerationOutput, RenderRecord, Transcript, Turn};
pub use error::{Error, Result};
pub use extract::extract_html;
pub use prompt::{build_prompt, build_prompt_text, PromptStrategy};
pub use render::{RenderOutput, Renderer};
