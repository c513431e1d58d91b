use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContentPart {
    Text { text: String },
    ImageUrl { image_url: ImageUrl },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageUrl {
    pub url: String,
}

impl ContentPart {
    pub fn image(url: String) -> Self {
        ContentPart::ImageUrl { image_url: ImageUrl { url } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: Vec<ContentPart>,
}

impl ChatMessage {
    pub fn user(content: Vec<ContentPart>) -> Self {
        Self { role: "user".into(), content }
    }

    pub fn assistant(text: &str) -> Self {
        Self {
            role: "assistant".into(),
            content: vec![ContentPart::Text { text: text.to_string() }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// One request/response pair as it went over the wire.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatExchange {
    pub request: Value,
    pub response: Value,
    pub content: String,
    pub attempts: u32,
    /// `None` when no seed was requested.
    pub seed_accepted: Option<bool>,
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatExchange>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_delay: Duration::from_secs(1),
        }
    }
}

/// Spaces consecutive requests to one endpoint at least `interval` apart.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(interval: Duration) -> Self {
        Self {
            interval,
            next: Mutex::new(None),
        }
    }

    pub fn wait(&self) {
        let slot = {
            let mut next = self.next.lock().unwrap();
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.interval);
            slot
        };
        let now = Instant::now();
        if slot > now {
            std::thread::sleep(slot - now);
        }
    }
}

/// An OpenAI-style `chat/completions` endpoint.
pub struct HttpChat {
    client: reqwest::blocking::Client,
    endpoint: String,
    api_key: String,
    retry: RetryPolicy,
    limiter: Option<RateLimiter>,
}

enum Attempt {
    Done(Value),
    Retry(String),
    SeedRejected,
    Fail(Error),
}

impl HttpChat {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(600))
            .build()
            .expect("http client builds");
        Self {
            client,
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            retry: RetryPolicy::default(),
            limiter: None,
        }
    }

    /// Reads the key from the environment variable named `credential_env`.
    pub fn from_env(endpoint: impl Into<String>, credential_env: &str) -> Result<Self> {
        let key = std::env::var(credential_env).map_err(|_| Error::MissingCredential(credential_env.to_string()))?;
        Ok(Self::new(endpoint, key))
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_min_interval(mut self, interval: Duration) -> Self {
        self.limiter = Some(RateLimiter::new(interval));
        self
    }

    fn attempt(&self, body: &Value) -> Attempt {
        if let Some(limiter) = &self.limiter {
            limiter.wait();
        }
        let sent = self.client.post(&self.endpoint).bearer_auth(&self.api_key).json(body).send();
        let response = match sent {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = response.status().as_u16();
        let text = match response.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        match status {
            200..=299 => match serde_json::from_str(&text) {
                Ok(v) => Attempt::Done(v),
                Err(e) => Attempt::Fail(Error::BadResponse(e.to_string())),
            },
            401 | 403 | 408 | 429 | 500..=599 => Attempt::Retry(format!("status {status}: {text}")),
            400..=499 if body.get("seed").is_some() && text.to_ascii_lowercase().contains("seed") => Attempt::SeedRejected,
            _ => Attempt::Fail(Error::Http { status, body: text }),
        }
    }
}

impl ChatBackend for HttpChat {
    fn complete(&self, request: &ChatRequest) -> Result<ChatExchange> {
        let mut body = serde_json::to_value(request)?;
        let mut seed_accepted = request.seed.map(|_| true);
        let mut attempts = 0;
        let mut delay = self.retry.initial_delay;
        loop {
            attempts += 1;
            let message = match self.attempt(&body) {
                Attempt::Done(response) => {
                    let content = reply_content(&response)?;
                    return Ok(ChatExchange {
                        request: body,
                        response,
                        content,
                        attempts,
                        seed_accepted,
                    });
                }
                Attempt::SeedRejected => {
                    // Resend without the seed; this does not count as a failure.
                    body.as_object_mut().unwrap().remove("seed");
                    seed_accepted = Some(false);
                    attempts -= 1;
                    continue;
                }
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(message) => message,
            };
            if attempts >= self.retry.attempts {
                return Err(Error::Transport { attempts, message });
            }
            std::thread::sleep(delay);
            delay *= 2;
        }
    }
}

/// The assistant text of the first choice, joining content parts if the
/// endpoint returned a list.
pub fn reply_content(response: &Value) -> Result<String> {
    let content = response
        .pointer("/choices/0/message/content")
        .ok_or_else(|| Error::BadResponse("no choices[0].message.content".into()))?;
    match content {
        Value::String(s) => Ok(s.clone()),
        Value::Array(parts) => Ok(parts.iter().filter_map(|p| p.get("text").and_then(Value::as_str)).collect()),
        _ => Err(Error::BadResponse("content is neither text nor a part list".into())),
    }
}
