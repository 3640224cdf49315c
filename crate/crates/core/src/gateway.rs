//! Model dispatch with deterministic settings and offline replay.
//!
//! Every request is content-addressed by a SHA-256 hash of the model name
//! and the full prompt bytes. A [`ReplayStore`] maps that hash to the raw
//! completion text in an append-only JSON-lines file, so a recorded
//! experiment can be replayed byte-exactly with no network access and no
//! credentials. The live backend sends the prompt as a single user message
//! at temperature 0, retries with exponential backoff, caps in-flight
//! requests, and records every fresh completion into the store.
//!
//! Credentials are read from the environment at transport construction and
//! are never written to the store, to run records, or to log output.

use std::collections::HashMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::prompt::Prompt;

/// Sampling temperature used for every request. Fixed: the whole
/// experimental design assumes deterministic decoding.
pub const TEMPERATURE: f64 = 0.0;

/// Default output-token budget; the largest 30×30 word-encoded grid plus
/// reasoning fits well under this.
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 2048;

/// One completion request: a model, a prompt, and an output budget.
/// Temperature is not a field because it is fixed at [`TEMPERATURE`].
#[derive(Clone, Debug)]
pub struct CompletionRequest {
    pub model_name: String,
    pub prompt: Prompt,
    pub max_output_tokens: u32,
}

impl CompletionRequest {
    pub fn new(model_name: impl Into<String>, prompt: Prompt) -> Self {
        CompletionRequest {
            model_name: model_name.into(),
            prompt,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
        }
    }

    /// Full prompt text sent to the model.
    pub fn prompt_text(&self) -> String {
        self.prompt.text()
    }

    /// Content address of this request in the replay store.
    pub fn hash(&self) -> String {
        request_hash(&self.model_name, &self.prompt_text())
    }
}

/// SHA-256 of `model_name`, a newline, and the prompt bytes, hex-encoded.
/// Any change to the prompt (including template revisions) therefore
/// invalidates stale recordings.
pub fn request_hash(model_name: &str, prompt_text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(model_name.as_bytes());
    hasher.update(b"\n");
    hasher.update(prompt_text.as_bytes());
    hex::encode(hasher.finalize())
}

/// Where a completion came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Live,
    Replay,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Live => "live",
            BackendKind::Replay => "replay",
        }
    }
}

/// Token accounting as reported by the service, when available.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// The outcome of a completion call. `raw_text` is preserved byte-exact;
/// all downstream parsing works from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletionResult {
    pub raw_text: String,
    pub model_name: String,
    pub latency_ms: u64,
    pub usage: Option<Usage>,
    pub backend: BackendKind,
}

/// Errors from the gateway itself (transport, store, integrity).
#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("replay store {path}: {message}")]
    Store { path: String, message: String },
    #[error("integrity error: hash {hash} is already recorded with different text")]
    Integrity { hash: String },
    #[error("missing credential: environment variable {var} is not set")]
    MissingCredential { var: String },
}

/// Errors from [`Gateway::complete`]. A replay miss is kept distinct from
/// [`GatewayError`] so callers can skip live-only cases cleanly.
#[derive(Debug, thiserror::Error)]
pub enum CompleteError {
    #[error("replay miss: no recording for hash {hash} (model {model_name})")]
    ReplayMiss { hash: String, model_name: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

impl CompleteError {
    pub fn is_replay_miss(&self) -> bool {
        matches!(self, CompleteError::ReplayMiss { .. })
    }
}

/// One line of the replay file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct StoredRecord {
    hash: String,
    model: String,
    prompt: String,
    raw_text: String,
    usage: Option<Usage>,
}

/// Append-only, content-addressed store of completions, persisted as one
/// JSON object per line.
///
/// Re-recording an existing hash with identical text is a no-op;
/// re-recording with different text is an integrity error, which guards
/// against remote non-determinism silently corrupting baselines.
pub struct ReplayStore {
    path: PathBuf,
    records: Mutex<HashMap<String, StoredRecord>>,
}

impl ReplayStore {
    /// Open a store file, loading any existing records. A missing file
    /// yields an empty store; the file is created on first record.
    pub fn open(path: impl AsRef<Path>) -> Result<ReplayStore, GatewayError> {
        let path = path.as_ref().to_path_buf();
        let mut records: HashMap<String, StoredRecord> = HashMap::new();
        match std::fs::read_to_string(&path) {
            Ok(contents) => {
                for (lineno, line) in contents.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let record: StoredRecord =
                        serde_json::from_str(line).map_err(|e| GatewayError::Store {
                            path: path.display().to_string(),
                            message: format!("line {}: {e}", lineno + 1),
                        })?;
                    match records.get(&record.hash) {
                        Some(prev) if prev.raw_text != record.raw_text => {
                            return Err(GatewayError::Integrity {
                                hash: record.hash,
                            });
                        }
                        _ => {
                            records.insert(record.hash.clone(), record);
                        }
                    }
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => {
                return Err(GatewayError::Store {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })
            }
        }
        Ok(ReplayStore {
            path,
            records: Mutex::new(records),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.records.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact-match lookup by content hash. Replayed results report zero
    /// latency so that replay runs are fully deterministic.
    pub fn lookup(&self, hash: &str) -> Option<CompletionResult> {
        let records = self.records.lock().unwrap();
        records.get(hash).map(|r| CompletionResult {
            raw_text: r.raw_text.clone(),
            model_name: r.model.clone(),
            latency_ms: 0,
            usage: r.usage.clone(),
            backend: BackendKind::Replay,
        })
    }

    /// Record a fresh completion for `req`, appending to the store file.
    pub fn record(
        &self,
        req: &CompletionRequest,
        raw_text: &str,
        usage: Option<Usage>,
    ) -> Result<(), GatewayError> {
        let hash = req.hash();
        let mut records = self.records.lock().unwrap();
        if let Some(existing) = records.get(&hash) {
            if existing.raw_text == raw_text {
                return Ok(());
            }
            return Err(GatewayError::Integrity { hash });
        }
        let record = StoredRecord {
            hash: hash.clone(),
            model: req.model_name.clone(),
            prompt: req.prompt_text(),
            raw_text: raw_text.to_string(),
            usage,
        };
        let line = serde_json::to_string(&record).map_err(|e| GatewayError::Store {
            path: self.path.display().to_string(),
            message: e.to_string(),
        })?;
        let io_err = |e: std::io::Error| GatewayError::Store {
            path: self.path.display().to_string(),
            message: e.to_string(),
        };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(io_err)?;
        file.write_all(line.as_bytes()).map_err(io_err)?;
        file.write_all(b"\n").map_err(io_err)?;
        file.flush().map_err(io_err)?;
        records.insert(hash, record);
        Ok(())
    }
}

/// Response of one raw transport exchange.
#[derive(Clone, Debug)]
pub struct TransportReply {
    pub text: String,
    pub usage: Option<Usage>,
}

/// Transport-level failures. Both kinds are retried with backoff.
#[derive(Debug)]
pub enum TransportError {
    RateLimited(String),
    Failed(String),
}

impl TransportError {
    fn message(&self) -> &str {
        match self {
            TransportError::RateLimited(m) | TransportError::Failed(m) => m,
        }
    }
}

/// A chat-completion wire protocol. Implementations must be shareable
/// across worker threads.
pub trait ChatTransport: Send + Sync {
    fn send(
        &self,
        model_name: &str,
        prompt_text: &str,
        max_output_tokens: u32,
    ) -> Result<TransportReply, TransportError>;
}

/// Settings for the live backend.
#[derive(Clone, Debug)]
pub struct LiveOptions {
    /// Maximum simultaneous in-flight requests.
    pub max_in_flight: usize,
    /// Maximum attempts per request (first try plus retries).
    pub max_attempts: u32,
    /// First backoff delay; doubles after each failed attempt.
    pub backoff_base: Duration,
}

impl Default for LiveOptions {
    fn default() -> Self {
        LiveOptions {
            max_in_flight: 4,
            max_attempts: 5,
            backoff_base: Duration::from_secs(2),
        }
    }
}

/// Entry point for completions: a replay store plus an optional live
/// transport. Safe to call from multiple worker threads.
pub struct Gateway {
    store: ReplayStore,
    live: Option<LiveBackend>,
}

struct LiveBackend {
    transport: Box<dyn ChatTransport>,
    limiter: Semaphore,
    options: LiveOptions,
}

impl Gateway {
    /// Offline gateway: every request must hit the store.
    pub fn replay(store: ReplayStore) -> Gateway {
        Gateway { store, live: None }
    }

    /// Live gateway: unseen requests go over the transport and are
    /// recorded; previously recorded requests are served from the store.
    pub fn live(store: ReplayStore, transport: Box<dyn ChatTransport>, options: LiveOptions) -> Gateway {
        let limiter = Semaphore::new(options.max_in_flight.max(1));
        Gateway {
            store,
            live: Some(LiveBackend {
                transport,
                limiter,
                options,
            }),
        }
    }

    pub fn backend_kind(&self) -> BackendKind {
        if self.live.is_some() {
            BackendKind::Live
        } else {
            BackendKind::Replay
        }
    }

    pub fn store(&self) -> &ReplayStore {
        &self.store
    }

    /// Resolve one request. Replay mode returns the stored result or a
    /// [`CompleteError::ReplayMiss`] naming the hash; live mode consults
    /// the store first, then performs the network call with retries and
    /// records the completion.
    pub fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, CompleteError> {
        let hash = req.hash();
        if let Some(result) = self.store.lookup(&hash) {
            return Ok(result);
        }
        let Some(live) = &self.live else {
            return Err(CompleteError::ReplayMiss {
                hash,
                model_name: req.model_name.clone(),
            });
        };
        let _permit = live.limiter.acquire();
        let mut attempt = 0;
        loop {
            attempt += 1;
            let started = Instant::now();
            match live
                .transport
                .send(&req.model_name, &req.prompt_text(), req.max_output_tokens)
            {
                Ok(reply) => {
                    let latency_ms = started.elapsed().as_millis() as u64;
                    self.store
                        .record(req, &reply.text, reply.usage.clone())
                        .map_err(CompleteError::Gateway)?;
                    return Ok(CompletionResult {
                        raw_text: reply.text,
                        model_name: req.model_name.clone(),
                        latency_ms,
                        usage: reply.usage,
                        backend: BackendKind::Live,
                    });
                }
                Err(err) => {
                    if attempt >= live.options.max_attempts {
                        return Err(CompleteError::Gateway(GatewayError::Transport {
                            attempts: attempt,
                            message: err.message().to_string(),
                        }));
                    }
                    let delay = live.options.backoff_base * 2u32.saturating_pow(attempt - 1);
                    std::thread::sleep(delay);
                }
            }
        }
    }
}

/// HTTP transport for OpenAI-compatible chat-completion endpoints.
///
/// The API key is read from an environment variable at construction and
/// held only in memory; the `Debug` representation never includes it.
pub struct HttpChatTransport {
    endpoint: String,
    api_key: String,
    client: reqwest::blocking::Client,
}

/// Environment variable consulted by [`HttpChatTransport::from_env`]
/// when no other variable name is given.
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

/// Default OpenAI-compatible endpoint.
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";

impl HttpChatTransport {
    /// Build a transport reading the credential from `api_key_env`.
    pub fn from_env(endpoint: impl Into<String>, api_key_env: &str) -> Result<Self, GatewayError> {
        let api_key = std::env::var(api_key_env).map_err(|_| GatewayError::MissingCredential {
            var: api_key_env.to_string(),
        })?;
        Ok(HttpChatTransport {
            endpoint: endpoint.into(),
            api_key,
            client: reqwest::blocking::Client::new(),
        })
    }
}

impl fmt::Debug for HttpChatTransport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpChatTransport")
            .field("endpoint", &self.endpoint)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: [WireMessage<'a>; 1],
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireReplyMessage,
}

#[derive(Deserialize)]
struct WireReplyMessage {
    content: String,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

impl ChatTransport for HttpChatTransport {
    fn send(
        &self,
        model_name: &str,
        prompt_text: &str,
        max_output_tokens: u32,
    ) -> Result<TransportReply, TransportError> {
        let body = WireRequest {
            model: model_name,
            messages: [WireMessage {
                role: "user",
                content: prompt_text,
            }],
            temperature: TEMPERATURE,
            max_tokens: max_output_tokens,
        };
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| TransportError::Failed(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 {
            return Err(TransportError::RateLimited(format!(
                "rate limited by {}",
                self.endpoint
            )));
        }
        if !status.is_success() {
            return Err(TransportError::Failed(format!(
                "HTTP {status} from {}",
                self.endpoint
            )));
        }
        let parsed: WireResponse = response
            .json()
            .map_err(|e| TransportError::Failed(format!("bad response body: {e}")))?;
        let first = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| TransportError::Failed("response contained no choices".into()))?;
        Ok(TransportReply {
            text: first.message.content,
            usage: parsed.usage.map(|u| Usage {
                prompt_tokens: u.prompt_tokens,
                completion_tokens: u.completion_tokens,
            }),
        })
    }
}

/// Counting semaphore for the in-flight cap.
struct Semaphore {
    permits: Mutex<usize>,
    available: Condvar,
}

struct SemaphorePermit<'a> {
    semaphore: &'a Semaphore,
}

impl Semaphore {
    fn new(permits: usize) -> Semaphore {
        Semaphore {
            permits: Mutex::new(permits),
            available: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphorePermit<'_> {
        let mut permits = self.permits.lock().unwrap();
        while *permits == 0 {
            permits = self.available.wait(permits).unwrap();
        }
        *permits -= 1;
        SemaphorePermit { semaphore: self }
    }
}

impl Drop for SemaphorePermit<'_> {
    fn drop(&mut self) {
        *self.semaphore.permits.lock().unwrap() += 1;
        self.semaphore.available.notify_one();
    }
}
