use std::path::Path;

use mrweb_core::resource::ResourceList;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::chat::{ChatBackend, ChatExchange, ChatMessage, ChatRequest};
use crate::error::{Error, Result};
use crate::extract::extract_html;
use crate::prompt::{build_prompt, PromptStrategy};
use crate::render::Renderer;

fn default_temperature() -> f64 {
    0.0
}
fn default_seed() -> u64 {
    42
}
fn default_max_tokens() -> u32 {
    4096
}
fn default_credential_env() -> String {
    "MRWEB_API_KEY".into()
}
fn default_refine_rounds() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "default_credential_env")]
    pub credential_env: String,
    #[serde(default = "default_refine_rounds")]
    pub refine_rounds: u32,
}

impl GenerationConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            temperature: default_temperature(),
            seed: default_seed(),
            max_tokens: default_max_tokens(),
            credential_env: default_credential_env(),
            refine_rounds: default_refine_rounds(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidConfig(format!("temperature {} must be >= 0", self.temperature)));
        }
        if self.max_tokens == 0 {
            return Err(Error::InvalidConfig("max_tokens must be at least 1".into()));
        }
        if self.model.is_empty() {
            return Err(Error::InvalidConfig("model must not be empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GenerationInputs {
    /// Reference screenshot, PNG encoded.
    pub screenshot: Vec<u8>,
    pub resources: ResourceList,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub request: Value,
    pub response: Value,
    pub attempts: u32,
}

/// An intermediate render made between self-refine turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderRecord {
    pub round: u32,
    pub width: u32,
    pub height: u32,
    pub elements: usize,
}

/// Everything sent to and received from the endpoint, in order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub strategy: PromptStrategy,
    pub model: String,
    pub temperature: f64,
    pub seed: u64,
    pub max_tokens: u32,
    pub refine_rounds: u32,
    /// Whether the endpoint took the seed parameter on every turn.
    pub seed_accepted: Option<bool>,
    pub turns: Vec<Turn>,
    pub renders: Vec<RenderRecord>,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("transcript serializes");
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone)]
pub struct GenerationOutput {
    pub html: String,
    pub transcript: Transcript,
}

struct Session<'a> {
    config: &'a GenerationConfig,
    backend: &'a dyn ChatBackend,
    messages: Vec<ChatMessage>,
    transcript: Transcript,
}

impl Session<'_> {
    fn turn(&mut self, message: ChatMessage) -> Result<(String, String)> {
        self.messages.push(message);
        let request = ChatRequest {
            model: self.config.model.clone(),
            messages: self.messages.clone(),
            temperature: self.config.temperature,
            max_tokens: self.config.max_tokens,
            seed: Some(self.config.seed),
        };
        let ChatExchange {
            request,
            response,
            content,
            attempts,
            seed_accepted,
        } = self.backend.complete(&request)?;
        self.transcript.seed_accepted = match (self.transcript.seed_accepted, seed_accepted) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (_, s) => s,
        };
        self.transcript.turns.push(Turn {
            request,
            response,
            attempts,
        });
        self.messages.push(ChatMessage::assistant(&content));
        match extract_html(&content) {
            Some(html) => Ok((content, html)),
            None => Err(Error::EmptyExtraction {
                transcript: Box::new(self.transcript.clone()),
            }),
        }
    }
}

/// Generates a page from a screenshot and resource list.
///
/// Self-refine starts with a zero-shot turn, then for each refine round
/// renders the current code in `work_dir` and sends the refine prompt with
/// both the reference and the current screenshot, continuing the same
/// conversation. A renderer is needed only for self-refine with at least
/// one round.
pub fn generate_page(
    inputs: &GenerationInputs,
    strategy: PromptStrategy,
    config: &GenerationConfig,
    backend: &dyn ChatBackend,
    renderer: Option<&Renderer>,
    work_dir: &Path,
) -> Result<GenerationOutput> {
    config.validate()?;
    let rounds = if strategy == PromptStrategy::SelfRefine { config.refine_rounds } else { 0 };
    if rounds > 0 && renderer.is_none() {
        return Err(Error::InvalidConfig("self-refine needs a renderer command".into()));
    }
    let mut session = Session {
        config,
        backend,
        messages: Vec::new(),
        transcript: Transcript {
            strategy,
            model: config.model.clone(),
            temperature: config.temperature,
            seed: config.seed,
            max_tokens: config.max_tokens,
            refine_rounds: rounds,
            seed_accepted: None,
            turns: Vec::new(),
            renders: Vec::new(),
        },
    };
    let first = match strategy {
        PromptStrategy::SelfRefine => PromptStrategy::ZeroShot,
        s => s,
    };
    let resources = first.uses_resources().then_some(&inputs.resources);
    let (_, mut html) = session.turn(build_prompt(first, resources, None, &[&inputs.screenshot])?)?;

    for round in 1..=rounds {
        let renderer = renderer.expect("checked above");
        let html_path = work_dir.join(format!("refine-{round}.html"));
        std::fs::write(&html_path, &html)?;
        let rendered = renderer.render(
            &html_path,
            &work_dir.join(format!("refine-{round}.png")),
            &work_dir.join(format!("refine-{round}.geometry.json")),
        )?;
        session.transcript.renders.push(RenderRecord {
            round,
            width: rendered.image.width(),
            height: rendered.image.height(),
            elements: rendered.dump.elements.len(),
        });
        let current = std::fs::read(&rendered.png)?;
        let prompt = build_prompt(
            PromptStrategy::SelfRefine,
            Some(&inputs.resources),
            Some(&html),
            &[&inputs.screenshot, &current],
        )?;
        html = session.turn(prompt)?.1;
    }
    Ok(GenerationOutput {
        html,
        transcript: session.transcript,
    })
}
