//! Chat-completion access plus offline responders.
//!
//! `Remote` speaks the common chat-completions JSON shape over blocking
//! HTTPS. The mock responders read the prompt itself: the last
//! `[STATEMENT]` gives the query, the first `[PLAN]` block the demo plan.

use std::sync::{Condvar, LazyLock, Mutex};
use std::thread;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::{Action, Instance};
use crate::oracle::solve_optimal;
use crate::prompts::parse_statement;
use crate::vocabulary::{Variant, Vocabulary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 4,
            backoff_base_ms: 1000,
        }
    }
}

/// One remote model. The credential itself is never stored, only the name
/// of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Label used in records and score tables.
    pub name: String,
    pub endpoint: String,
    /// Model identifier sent to the endpoint; defaults to `name`.
    #[serde(default)]
    pub model: Option<String>,
    pub credential_env: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub max_output_tokens: Option<u32>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_timeout() -> u64 {
    120
}

impl ModelConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(format!("{}: temperature must be >= 0", self.name));
        }
        if self.retry.max_attempts == 0 {
            return Err(format!("{}: max_attempts must be >= 1", self.name));
        }
        Ok(())
    }

    fn model_id(&self) -> &str {
        self.model.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Responder {
    Remote(ModelConfig),
    Oracle,
    EchoDemo,
    Scramble { seed: u64 },
}

impl Responder {
    /// Model column in records.
    pub fn name(&self) -> String {
        match self {
            Responder::Remote(c) => c.name.clone(),
            Responder::Oracle => "oracle".into(),
            Responder::EchoDemo => "echo-demo".into(),
            Responder::Scramble { seed } => format!("scramble-{seed}"),
        }
    }

    pub fn is_remote(&self) -> bool {
        matches!(self, Responder::Remote(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawResponse {
    pub text: String,
    pub model: String,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("credential variable {0} is not set")]
    Auth(String),
    #[error("rate limited (retry after {retry_after_secs:?} s)")]
    RateLimited { retry_after_secs: Option<u64> },
    #[error("transport failed after {attempts} attempts: {message}")]
    Transport { attempts: u32, message: String },
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed completion: {0}")]
    Malformed(String),
    #[error("mock responder cannot read the prompt: {0}")]
    Unreadable(String),
}

impl GatewayError {
    /// Short class name stored in failed records.
    pub fn class(&self) -> &'static str {
        match self {
            GatewayError::Auth(_) => "auth",
            GatewayError::RateLimited { .. } => "rate-limited",
            GatewayError::Transport { .. } => "transport",
            GatewayError::Http { .. } => "http",
            GatewayError::Malformed(_) => "malformed",
            GatewayError::Unreadable(_) => "unreadable",
        }
    }
}

/// Caps in-flight remote requests across all workers.
struct Limiter {
    state: Mutex<(usize, usize)>,
    freed: Condvar,
}

static LIMITER: LazyLock<Limiter> = LazyLock::new(|| Limiter {
    state: Mutex::new((0, 4)),
    freed: Condvar::new(),
});

struct Permit;

impl Limiter {
    fn acquire(&self) -> Permit {
        let mut state = self.state.lock().unwrap();
        while state.0 >= state.1 {
            state = self.freed.wait(state).unwrap();
        }
        state.0 += 1;
        Permit
    }
}

impl Drop for Permit {
    fn drop(&mut self) {
        LIMITER.state.lock().unwrap().0 -= 1;
        LIMITER.freed.notify_one();
    }
}

/// Sets the process-wide cap on concurrent remote requests (default 4).
pub fn set_remote_concurrency(limit: usize) {
    LIMITER.state.lock().unwrap().1 = limit.max(1);
    LIMITER.freed.notify_all();
}

pub fn complete(
    responder: &Responder,
    system_prompt: &str,
    user_prompt: &str,
) -> Result<RawResponse, GatewayError> {
    let text = match responder {
        Responder::Remote(config) => return remote(config, system_prompt, user_prompt),
        Responder::Oracle => {
            let (vocab, query) = read_query(user_prompt)?;
            let plan = solve_optimal(&query)
                .map_err(|e| GatewayError::Unreadable(e.to_string()))?
                .plan;
            tagged(&render(&vocab, &plan))
        }
        Responder::EchoDemo => tagged(
            &demo_plan_text(user_prompt)
                .ok_or_else(|| GatewayError::Unreadable("no demonstration plan".into()))?,
        ),
        Responder::Scramble { seed } => tagged(&scramble(*seed, user_prompt)?),
    };
    Ok(RawResponse {
        text,
        model: responder.name(),
        prompt_tokens: None,
        completion_tokens: None,
    })
}

fn tagged(body: &str) -> String {
    format!("[PLAN]\n{body}\n[PLAN END]")
}

fn render(vocab: &Vocabulary, plan: &[Action]) -> String {
    plan.iter()
        .map(|a| vocab.render_action(a))
        .collect::<Vec<_>>()
        .join("\n")
}

/// The last statement in the prompt, read under whichever builtin
/// vocabulary parses it.
pub fn read_query(prompt: &str) -> Result<(Vocabulary, Instance), GatewayError> {
    let start = prompt
        .rfind("[STATEMENT]")
        .ok_or_else(|| GatewayError::Unreadable("no [STATEMENT]".into()))?;
    let statement: String = prompt[start + "[STATEMENT]".len()..]
        .trim_start()
        .lines()
        .take_while(|l| !l.trim().is_empty())
        .collect::<Vec<_>>()
        .join("\n");
    Variant::ALL
        .into_iter()
        .map(Vocabulary::builtin)
        .find_map(|v| parse_statement(&v, &statement).map(|inst| (v, inst)))
        .ok_or_else(|| GatewayError::Unreadable("statement matches no builtin vocabulary".into()))
}

/// Lines between the first `[PLAN]` and `[PLAN END]`.
fn demo_plan_text(prompt: &str) -> Option<String> {
    let start = prompt.find("[PLAN]")? + "[PLAN]".len();
    let len = prompt[start..].find("[PLAN END]")?;
    Some(prompt[start..start + len].trim().to_string())
}

/// Swaps two distinct lines of the demo plan, chosen from the seed and the
/// prompt. Zero-shot prompts have no demo, so the oracle plan is swapped.
fn scramble(seed: u64, prompt: &str) -> Result<String, GatewayError> {
    let body = match demo_plan_text(prompt) {
        Some(text) => text,
        None => {
            let (vocab, query) = read_query(prompt)?;
            let plan = solve_optimal(&query)
                .map_err(|e| GatewayError::Unreadable(e.to_string()))?
                .plan;
            render(&vocab, &plan)
        }
    };
    let mut lines: Vec<&str> = body.lines().collect();
    let pairs: Vec<(usize, usize)> = (0..lines.len())
        .flat_map(|i| (i + 1..lines.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| lines[i].trim() != lines[j].trim())
        .collect();
    if !pairs.is_empty() {
        let digest = Sha256::digest(prompt.as_bytes());
        let mix = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ mix);
        let (i, j) = pairs[rng.random_range(0..pairs.len())];
        lines.swap(i, j);
    }
    Ok(lines.join("\n"))
}

fn request_body(config: &ModelConfig, system_prompt: &str, user_prompt: &str) -> Value {
    let mut messages = Vec::new();
    if !system_prompt.is_empty() {
        messages.push(json!({"role": "system", "content": system_prompt}));
    }
    messages.push(json!({"role": "user", "content": user_prompt}));
    let mut body = json!({
        "model": config.model_id(),
        "messages": messages,
        "temperature": config.temperature,
    });
    if let Some(max) = config.max_output_tokens {
        body["max_tokens"] = json!(max);
    }
    body
}

fn parse_completion(config: &ModelConfig, body: &str) -> Result<RawResponse, GatewayError> {
    let doc: Value =
        serde_json::from_str(body).map_err(|e| GatewayError::Malformed(e.to_string()))?;
    let text = doc["choices"][0]["message"]["content"]
        .as_str()
        .ok_or_else(|| GatewayError::Malformed("no choices[0].message.content".into()))?;
    Ok(RawResponse {
        text: text.to_string(),
        model: config.name.clone(),
        prompt_tokens: doc["usage"]["prompt_tokens"].as_u64(),
        completion_tokens: doc["usage"]["completion_tokens"].as_u64(),
    })
}

enum Attempt {
    Done(Result<RawResponse, GatewayError>),
    Retry { wait: Option<Duration>, error: GatewayError },
}

fn attempt(agent: &ureq::Agent, config: &ModelConfig, key: &str, body: &str) -> Attempt {
    let result = agent
        .post(&config.endpoint)
        .header("Authorization", &format!("Bearer {key}"))
        .header("Content-Type", "application/json")
        .send(body);
    let mut response = match result {
        Ok(r) => r,
        Err(e) => {
            return Attempt::Retry {
                wait: None,
                error: GatewayError::Transport {
                    attempts: 0,
                    message: e.to_string(),
                },
            }
        }
    };
    let status = response.status().as_u16();
    let retry_after = response
        .headers()
        .get("retry-after")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok());
    let text = response.body_mut().read_to_string().unwrap_or_default();
    match status {
        200..=299 => Attempt::Done(parse_completion(config, &text)),
        401 | 403 => Attempt::Done(Err(GatewayError::Auth(format!(
            "{} rejected the credential (HTTP {status})",
            config.endpoint
        )))),
        429 => Attempt::Retry {
            wait: retry_after.map(Duration::from_secs),
            error: GatewayError::RateLimited {
                retry_after_secs: retry_after,
            },
        },
        500..=599 => Attempt::Retry {
            wait: None,
            error: GatewayError::Http { status, body: text },
        },
        _ => Attempt::Done(Err(GatewayError::Http { status, body: text })),
    }
}

fn remote(
    config: &ModelConfig,
    system_prompt: &str,
    user_prompt: &str,
) -> Result<RawResponse, GatewayError> {
    let key = std::env::var(&config.credential_env)
        .ok()
        .filter(|k| !k.is_empty())
        .ok_or_else(|| GatewayError::Auth(config.credential_env.clone()))?;
    config.check().map_err(GatewayError::Malformed)?;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
        .http_status_as_error(false)
        .build()
        .into();
    let body = request_body(config, system_prompt, user_prompt).to_string();
    let _permit = LIMITER.acquire();
    let mut last = None;
    for n in 1..=config.retry.max_attempts {
        match attempt(&agent, config, &key, &body) {
            Attempt::Done(result) => return result,
            Attempt::Retry { wait, error } => {
                last = Some(error);
                if n < config.retry.max_attempts {
                    let backoff = config.retry.backoff_base_ms.saturating_mul(1 << (n - 1).min(16));
                    thread::sleep(wait.unwrap_or(Duration::from_millis(backoff)));
                }
            }
        }
    }
    Err(match last.expect("at least one attempt") {
        e @ GatewayError::RateLimited { .. } => e,
        GatewayError::Transport { message, .. } => GatewayError::Transport {
            attempts: config.retry.max_attempts,
            message,
        },
        other => GatewayError::Transport {
            attempts: config.retry.max_attempts,
            message: other.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::extract_plan;
    use crate::prompts::{assemble_prompt, reference, PromptMode, PromptSpec};
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    fn prompt(variant: Variant, mode: PromptMode) -> String {
        let demo = mode.is_one_shot().then(reference::demo);
        assemble_prompt(&PromptSpec::new(variant, mode, reference::query_instance(), demo)).unwrap()
    }

    #[test]
    fn oracle_answers_every_prompt_shape() {
        let query = reference::query_instance();
        for variant in Variant::ALL {
            let vocab = Vocabulary::builtin(variant);
            for mode in PromptMode::ALL {
                let r = complete(&Responder::Oracle, "", &prompt(variant, mode)).unwrap();
                let plan = extract_plan(&vocab, &query.blocks, &r.text).unwrap();
                assert!(query.plan_is_correct(&plan.actions), "{variant} {mode}");
            }
        }
    }

    #[test]
    fn echo_returns_the_demo_plan() {
        let r = complete(&Responder::EchoDemo, "", &prompt(Variant::Mystery, PromptMode::PlainOneShot))
            .unwrap();
        assert_eq!(
            r.text,
            "[PLAN]\nfeast object b from object c\nsuccumb object b\nattack object c\novercome object c from object b\n[PLAN END]"
        );
    }

    #[test]
    fn scramble_is_deterministic_and_breaks_the_demo() {
        let p = prompt(Variant::Classic, PromptMode::PlainOneShot);
        let a = complete(&Responder::Scramble { seed: 3 }, "", &p).unwrap();
        assert_eq!(a, complete(&Responder::Scramble { seed: 3 }, "", &p).unwrap());
        let vocab = Vocabulary::builtin(Variant::Classic);
        let demo = reference::demo_instance();
        let plan = extract_plan(&vocab, &demo.blocks, &a.text).unwrap();
        assert_eq!(plan.actions.len(), 4);
        assert!(crate::domain::execute_plan(&demo.initial, &plan.actions).is_err());
    }

    #[test]
    fn missing_credential_fails_before_any_request() {
        let config = ModelConfig {
            name: "m".into(),
            endpoint: "http://127.0.0.1:9/never".into(),
            model: None,
            credential_env: "TMKBENCH_TEST_UNSET_CREDENTIAL".into(),
            temperature: 0.0,
            max_output_tokens: None,
            timeout_secs: 1,
            retry: RetryPolicy::default(),
        };
        assert_eq!(
            complete(&Responder::Remote(config), "", "hi"),
            Err(GatewayError::Auth("TMKBENCH_TEST_UNSET_CREDENTIAL".into()))
        );
    }

    /// Serves canned HTTP responses in order and returns the request bodies.
    fn serve(replies: Vec<(u16, &'static str, &'static str)>) -> (String, thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let handle = thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, extra, body) in replies {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut length = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line.trim().is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_lowercase().strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; length];
                reader.read_exact(&mut buf).unwrap();
                bodies.push(String::from_utf8(buf).unwrap());
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\n{extra}Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            bodies
        });
        (url, handle)
    }

    fn local_config(url: String, env: &str) -> ModelConfig {
        std::env::set_var(env, "test-key");
        ModelConfig {
            name: "local".into(),
            endpoint: url,
            model: Some("local-model".into()),
            credential_env: env.into(),
            temperature: 0.0,
            max_output_tokens: Some(64),
            timeout_secs: 5,
            retry: RetryPolicy {
                max_attempts: 3,
                backoff_base_ms: 1,
            },
        }
    }

    const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"[PLAN]\npick up the red block\n[PLAN END]"}}],"usage":{"prompt_tokens":12,"completion_tokens":7}}"#;

    #[test]
    fn remote_retries_transient_failures() {
        let (url, server) = serve(vec![(503, "", "busy"), (429, "Retry-After: 0\r\n", ""), (200, "", OK)]);
        let config = local_config(url, "TMKBENCH_TEST_KEY_RETRY");
        let r = complete(&Responder::Remote(config), "be terse", "hello").unwrap();
        assert_eq!(r.text, "[PLAN]\npick up the red block\n[PLAN END]");
        assert_eq!((r.prompt_tokens, r.completion_tokens), (Some(12), Some(7)));
        let bodies = server.join().unwrap();
        assert_eq!(bodies.len(), 3);
        let sent: Value = serde_json::from_str(&bodies[0]).unwrap();
        assert_eq!(sent["model"], "local-model");
        assert_eq!(sent["messages"][0]["role"], "system");
        assert_eq!(sent["messages"][1]["content"], "hello");
        assert_eq!(sent["max_tokens"], 64);
    }

    #[test]
    fn remote_surfaces_rate_limits_after_exhaustion() {
        let reply = (429, "Retry-After: 0\r\n", "");
        let (url, server) = serve(vec![reply, reply, reply]);
        let config = local_config(url, "TMKBENCH_TEST_KEY_429");
        assert_eq!(
            complete(&Responder::Remote(config), "", "hello"),
            Err(GatewayError::RateLimited { retry_after_secs: Some(0) })
        );
        server.join().unwrap();
    }

    #[test]
    fn remote_does_not_retry_client_errors() {
        let (url, server) = serve(vec![(400, "", "bad request")]);
        let config = local_config(url, "TMKBENCH_TEST_KEY_400");
        assert_eq!(
            complete(&Responder::Remote(config), "", "hello"),
            Err(GatewayError::Http { status: 400, body: "bad request".into() })
        );
        assert_eq!(server.join().unwrap().len(), 1);
    }
}
