use std::path::Path;
use std::time::Duration;

use mrweb_core::resource::DEFAULT_ROUTE_PREFIXES;
use mrweb_gen::GenerationConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CONFIG_FILE: &str = "mrweb.json";

fn seed() -> u64 {
    42
}
fn route_prefixes() -> Vec<String> {
    DEFAULT_ROUTE_PREFIXES.iter().map(|s| s.to_string()).collect()
}
fn renderer_timeout_secs() -> u64 {
    60
}
fn model() -> String {
    "gpt-4o".into()
}
fn endpoint() -> String {
    "https://api.openai.com/v1/chat/completions".into()
}
fn credential_env() -> String {
    "MRWEB_API_KEY".into()
}
fn max_tokens() -> u32 {
    4096
}
fn refine_rounds() -> u32 {
    1
}
fn max_in_flight() -> usize {
    2
}

/// Contents of `mrweb.json` at the workspace root. Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "seed")]
    pub seed: u64,
    #[serde(default = "route_prefixes")]
    pub route_prefixes: Vec<String>,
    #[serde(default)]
    pub renderer_command: Option<String>,
    #[serde(default = "renderer_timeout_secs")]
    pub renderer_timeout_secs: u64,
    #[serde(default = "endpoint")]
    pub endpoint: String,
    #[serde(default = "model")]
    pub model: String,
    #[serde(default = "credential_env")]
    pub credential_env: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "max_tokens")]
    pub max_tokens: u32,
    #[serde(default = "refine_rounds")]
    pub refine_rounds: u32,
    #[serde(default = "max_in_flight")]
    pub max_in_flight: usize,
    /// Minimum spacing between requests to the chat endpoint.
    #[serde(default)]
    pub min_request_interval_ms: u64,
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: Config = serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))?;
        config.validate().map_err(|e| e.in_file(path))?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.generation().validate()?;
        if self.max_in_flight == 0 {
            return Err(Error::Invalid("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }

    pub fn generation(&self) -> GenerationConfig {
        GenerationConfig {
            endpoint: self.endpoint.clone(),
            model: self.model.clone(),
            temperature: self.temperature,
            seed: self.seed,
            max_tokens: self.max_tokens,
            credential_env: self.credential_env.clone(),
            refine_rounds: self.refine_rounds,
        }
    }

    pub fn min_request_interval(&self) -> Duration {
        Duration::from_millis(self.min_request_interval_ms)
    }
}
