//! Chat-completion client: online against an OpenAI-compatible endpoint, or
//! offline replaying recorded answers keyed by prompt digest.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_ENDPOINT: &str = "IPVERIFY_LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "IPVERIFY_LLM_API_KEY";
pub const ENV_MODEL: &str = "IPVERIFY_LLM_MODEL";

pub const DEFAULT_MODEL: &str = "gpt-4o";
pub const DEFAULT_MAX_IN_FLIGHT: usize = 2;
const EXCERPT_LEN: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub model_id: String,
}

impl ChatRequest {
    pub fn new(system_prompt: impl Into<String>, user_prompt: impl Into<String>, model_id: impl Into<String>) -> Self {
        ChatRequest {
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            temperature: 0.0,
            max_tokens: 1024,
            model_id: model_id.into(),
        }
    }

    /// Hex SHA-256 of system prompt, user prompt and model id, NUL-separated.
    pub fn digest(&self) -> String {
        prompt_digest(&self.system_prompt, &self.user_prompt, &self.model_id)
    }

    fn validate(&self) -> Result<(), LlmError> {
        if self.system_prompt.is_empty() || self.user_prompt.is_empty() {
            return Err(LlmError::InvalidRequest("prompts must be non-empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(LlmError::InvalidRequest(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.max_tokens == 0 {
            return Err(LlmError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

pub fn prompt_digest(system: &str, user: &str, model: &str) -> String {
    let mut h = Sha256::new();
    h.update(system.as_bytes());
    h.update([0]);
    h.update(user.as_bytes());
    h.update([0]);
    h.update(model.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseSource {
    Online,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatResponse {
    pub text: String,
    pub source: ResponseSource,
    pub prompt_digest: String,
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("missing LLM credentials: set {0}")]
    MissingCredentials(String),
    #[error("LLM endpoint returned HTTP {status}: {body}")]
    HttpError { status: u16, body: String },
    #[error("no recorded response for prompt digest {digest} in {}", dir.display())]
    FixtureMissing { digest: String, dir: PathBuf },
    #[error("LLM transport error: {0}")]
    Transport(String),
    #[error("malformed LLM response: {0}")]
    MalformedResponse(String),
    #[error("invalid chat request: {0}")]
    InvalidRequest(String),
    #[error("cannot use {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OnlineConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub api_key: String,
}

impl OnlineConfig {
    pub fn from_env() -> Result<Self, LlmError> {
        let get = |k: &str| std::env::var(k).ok().filter(|v| !v.trim().is_empty());
        let endpoint = get(ENV_ENDPOINT).ok_or_else(|| LlmError::MissingCredentials(ENV_ENDPOINT.into()))?;
        let api_key = get(ENV_API_KEY).ok_or_else(|| LlmError::MissingCredentials(ENV_API_KEY.into()))?;
        Ok(OnlineConfig { endpoint, api_key })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    Online(OnlineConfig),
    Offline(PathBuf),
}

/// Anything that answers chat requests. The mining pipeline is written
/// against this so tests can script answers.
pub trait ChatModel: Sync {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError>;
    fn model_id(&self) -> &str;
}

/// Counting semaphore bounding concurrent requests.
struct Limiter {
    in_flight: Mutex<usize>,
    released: Condvar,
    max: usize,
}

impl Limiter {
    fn acquire(&self) -> LimiterGuard<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.max {
            n = self.released.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        LimiterGuard(self)
    }
}

struct LimiterGuard<'a>(&'a Limiter);

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.released.notify_one();
    }
}

pub struct LlmClient {
    mode: Mode,
    model_id: String,
    limiter: Limiter,
    log: Option<Mutex<File>>,
    agent: ureq::Agent,
}

impl LlmClient {
    pub fn new(mode: Mode, model_id: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(180)))
            .build()
            .into();
        LlmClient {
            mode,
            model_id: model_id.into(),
            limiter: Limiter { in_flight: Mutex::new(0), released: Condvar::new(), max: DEFAULT_MAX_IN_FLIGHT },
            log: None,
            agent,
        }
    }

    pub fn with_max_in_flight(mut self, max: usize) -> Self {
        self.limiter.max = max.max(1);
        self
    }

    /// Appends one JSON record per call to `path`, creating parent dirs.
    pub fn with_session_log(mut self, path: &Path) -> Result<Self, LlmError> {
        let io = |source| LlmError::Io { path: path.to_path_buf(), source };
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(io)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        self.log = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    fn replay(&self, dir: &Path, digest: &str) -> Result<String, LlmError> {
        let path = dir.join(format!("{digest}.txt"));
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(LlmError::FixtureMissing { digest: digest.to_string(), dir: dir.to_path_buf() })
            }
            Err(source) => Err(LlmError::Io { path, source }),
        }
    }

    fn post(&self, cfg: &OnlineConfig, req: &ChatRequest) -> Result<String, LlmError> {
        let url = format!("{}/chat/completions", cfg.endpoint.trim_end_matches('/'));
        let body = json!({
            "model": req.model_id,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let mut attempt = 0;
        loop {
            attempt += 1;
            let mut resp = self
                .agent
                .post(&url)
                .header("Authorization", &format!("Bearer {}", cfg.api_key))
                .send_json(&body)
                .map_err(|e| LlmError::Transport(e.to_string()))?;
            let status = resp.status().as_u16();
            let text = resp.body_mut().read_to_string().map_err(|e| LlmError::Transport(e.to_string()))?;
            if status == 200 {
                return first_completion(&text);
            }
            let retryable = status == 429 || status >= 500;
            if !retryable || attempt == 2 {
                return Err(LlmError::HttpError { status, body: excerpt(&text) });
            }
            log::warn!("LLM endpoint returned {status}, retrying once");
            std::thread::sleep(Duration::from_millis(500));
        }
    }

    fn record(&self, req: &ChatRequest, digest: &str, started: &str, outcome: &Result<ChatResponse, LlmError>) {
        let Some(log) = &self.log else { return };
        let mode = match self.mode {
            Mode::Online(_) => "online",
            Mode::Offline(_) => "offline",
        };
        let mut rec = json!({
            "digest": digest,
            "mode": mode,
            "model": req.model_id,
            "started": started,
            "finished": now(),
        });
        match outcome {
            Ok(r) => rec["response_chars"] = json!(r.text.chars().count()),
            Err(e) => rec["error"] = json!(e.to_string()),
        }
        let mut f = log.lock().unwrap_or_else(|e| e.into_inner());
        if let Err(e) = writeln!(f, "{rec}") {
            log::warn!("cannot write LLM session log: {e}");
        }
    }
}

impl ChatModel for LlmClient {
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.validate()?;
        let digest = req.digest();
        let started = now();
        let outcome = {
            let _slot = self.limiter.acquire();
            match &self.mode {
                Mode::Offline(dir) => self.replay(dir, &digest).map(|text| (text, ResponseSource::Fixture)),
                Mode::Online(cfg) => self.post(cfg, req).map(|text| (text, ResponseSource::Online)),
            }
        }
        .map(|(text, source)| ChatResponse { text, source, prompt_digest: digest.clone() });
        self.record(req, &digest, &started, &outcome);
        outcome
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }
}

/// Closure-backed model, for tests and dry runs.
pub struct FnModel<F> {
    model_id: String,
    answer: F,
}

impl<F> FnModel<F>
where
    F: Fn(&ChatRequest) -> Result<String, LlmError> + Sync,
{
    pub fn new(model_id: impl Into<String>, answer: F) -> Self {
        FnModel { model_id: model_id.into(), answer }
    }
}

impl<F> ChatModel for FnModel<F>
where
    F: Fn(&ChatRequest) -> Result<String, LlmError> + Sync,
{
    fn chat(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        req.validate()?;
        let text = (self.answer)(req)?;
        Ok(ChatResponse { text, source: ResponseSource::Fixture, prompt_digest: req.digest() })
    }

    fn model_id(&self) -> &str {
        &self.model_id
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn excerpt(s: &str) -> String {
    match s.char_indices().nth(EXCERPT_LEN) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

fn first_completion(body: &str) -> Result<String, LlmError> {
    let v: serde_json::Value =
        serde_json::from_str(body).map_err(|e| LlmError::MalformedResponse(format!("{e}: {}", excerpt(body))))?;
    v["choices"][0]["message"]["content"]
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| LlmError::MalformedResponse(format!("no choices[0].message.content in {}", excerpt(body))))
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    use super::*;

    fn req(user: &str) -> ChatRequest {
        ChatRequest::new("sys", user, "m")
    }

    #[test]
    fn digest_is_hex_sha256_and_separates_fields() {
        let d = req("u").digest();
        assert_eq!(d.len(), 64);
        assert!(d.chars().all(|c| c.is_ascii_hexdigit()));
        assert_ne!(prompt_digest("ab", "c", "m"), prompt_digest("a", "bc", "m"));
    }

    #[test]
    fn offline_replay_and_missing_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let r = req("hello");
        std::fs::write(dir.path().join(format!("{}.txt", r.digest())), "recorded\n").unwrap();
        let log = dir.path().join("logs/session.jsonl");
        let client = LlmClient::new(Mode::Offline(dir.path().into()), "m").with_session_log(&log).unwrap();
        let a = client.chat(&r).unwrap();
        let b = client.chat(&r).unwrap();
        assert_eq!(a.text, "recorded\n");
        assert_eq!(a, b);
        assert_eq!(a.source, ResponseSource::Fixture);
        assert!(matches!(client.chat(&req("other")), Err(LlmError::FixtureMissing { .. })));
        let lines = std::fs::read_to_string(&log).unwrap();
        assert_eq!(lines.lines().count(), 3);
        assert!(lines.contains("\"mode\":\"offline\""));
    }

    #[test]
    fn invalid_requests() {
        let client = LlmClient::new(Mode::Offline(PathBuf::from("/nonexistent")), "m");
        assert!(matches!(client.chat(&req("")), Err(LlmError::InvalidRequest(_))));
        let mut r = req("x");
        r.temperature = 2.5;
        assert!(matches!(client.chat(&r), Err(LlmError::InvalidRequest(_))));
    }

    #[test]
    fn missing_credentials() {
        // Only this test touches these variables.
        std::env::remove_var(ENV_API_KEY);
        std::env::set_var(ENV_ENDPOINT, "http://127.0.0.1:1");
        assert!(matches!(OnlineConfig::from_env(), Err(LlmError::MissingCredentials(k)) if k == ENV_API_KEY));
        std::env::remove_var(ENV_ENDPOINT);
        assert!(matches!(OnlineConfig::from_env(), Err(LlmError::MissingCredentials(k)) if k == ENV_ENDPOINT));
    }

    /// Serves canned HTTP responses, one per connection; returns the base URL
    /// and the captured request bodies.
    fn stub_server(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let seen2 = Arc::clone(&seen);
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                let mut head = String::new();
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    head.push_str(&line);
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                seen2.lock().unwrap().push(format!("{head}\n{}", String::from_utf8(buf).unwrap()));
                let resp = format!(
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(resp.as_bytes()).unwrap();
            }
        });
        (url, seen)
    }

    fn online(url: String) -> LlmClient {
        LlmClient::new(Mode::Online(OnlineConfig { endpoint: url, api_key: "k".into() }), "m")
    }

    #[test]
    fn online_request_shape_and_reply() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"LTL Formula: G(p)"}}]}"#;
        let (url, seen) = stub_server(vec![(200, ok.into())]);
        let r = online(url).chat(&req("hi")).unwrap();
        assert_eq!(r.text, "LTL Formula: G(p)");
        assert_eq!(r.source, ResponseSource::Online);
        let captured = seen.lock().unwrap()[0].clone();
        assert!(captured.starts_with("POST /chat/completions"));
        assert!(captured.to_ascii_lowercase().contains("authorization: bearer k"));
        let body: serde_json::Value = serde_json::from_str(captured.split("\n\n").last().unwrap().trim()).unwrap();
        assert_eq!(body["model"], "m");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "hi");
        assert_eq!(body["temperature"], 0.0);
    }

    #[test]
    fn online_retries_once_on_server_error() {
        let ok = r#"{"choices":[{"message":{"content":"fine"}}]}"#;
        let (url, _) = stub_server(vec![(503, "busy".into()), (200, ok.into())]);
        assert_eq!(online(url).chat(&req("x")).unwrap().text, "fine");

        let (url, _) = stub_server(vec![(500, "a".into()), (500, "b".into())]);
        assert!(matches!(online(url).chat(&req("x")), Err(LlmError::HttpError { status: 500, body }) if body == "b"));

        let (url, seen) = stub_server(vec![(401, "denied".into())]);
        assert!(matches!(online(url).chat(&req("x")), Err(LlmError::HttpError { status: 401, .. })));
        assert_eq!(seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn limiter_bounds_concurrency() {
        let limiter = Limiter { in_flight: Mutex::new(0), released: Condvar::new(), max: 2 };
        let active = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| {
                    let _g = limiter.acquire();
                    let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(10));
                    active.fetch_sub(1, Ordering::SeqCst);
                });
            }
        });
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
