//! Generic HTTP adapter: drives any REST-style XML database server from a
//! small key-value configuration, with no per-product code.

use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use crate::codec::NamedDoc;
use crate::engine::QueryResult;

use super::driver::{Driver, DriverError, QueryPayload, QueryRequest};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HttpConfigError {
    #[error("driver config is missing required key {0:?}")]
    MissingKey(&'static str),
    #[error("driver config has unknown key {0:?}")]
    UnknownKey(String),
    #[error("driver config line is not `key = value`: {0:?}")]
    BadLine(String),
    #[error("driver config value for {key:?} is invalid: {text:?}")]
    BadValue { key: &'static str, text: String },
}

/// Endpoint layout and capabilities of an HTTP backend.
///
/// Path templates substitute `{name}` (document name) and `{id}` (query id,
/// e.g. `Q07`). A backend whose query endpoint answers JSON in the engine's
/// result shape may set `comparable_rows = true` to opt into verification;
/// anything else is treated as an opaque, timing-only payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpDriverConfig {
    pub base_url: String,
    pub load_method: String,
    pub load_path: String,
    pub query_method: String,
    pub query_path: String,
    pub reset_method: String,
    /// Reset endpoint; without one, `reset` is a no-op because external
    /// stores manage their own lifecycle.
    pub reset_path: Option<String>,
    /// Extra header sent with every request, as `name: value`.
    pub auth_header: Option<(String, String)>,
    pub comparable_rows: bool,
    pub connect_timeout: Duration,
    pub load_timeout: Duration,
}

impl Default for HttpDriverConfig {
    fn default() -> Self {
        HttpDriverConfig {
            base_url: String::new(),
            load_method: "PUT".to_string(),
            load_path: "/documents/{name}".to_string(),
            query_method: "POST".to_string(),
            query_path: "/queries/{id}".to_string(),
            reset_method: "POST".to_string(),
            reset_path: None,
            auth_header: None,
            comparable_rows: false,
            connect_timeout: Duration::from_secs(5),
            load_timeout: Duration::from_secs(60),
        }
    }
}

impl HttpDriverConfig {
    /// Minimal configuration against default endpoint paths.
    pub fn for_base_url(base_url: impl Into<String>) -> Self {
        HttpDriverConfig { base_url: base_url.into(), ..HttpDriverConfig::default() }
    }

    /// Parses `key = value` lines; `#` starts a comment. `base_url` is
    /// required, everything else defaults.
    pub fn parse(text: &str) -> Result<Self, HttpConfigError> {
        let mut cfg = HttpDriverConfig::default();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HttpConfigError::BadLine(raw.trim().to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "base_url" => cfg.base_url = value.to_string(),
                "load_method" => cfg.load_method = value.to_ascii_uppercase(),
                "load_path" => cfg.load_path = value.to_string(),
                "query_method" => cfg.query_method = value.to_ascii_uppercase(),
                "query_path" => cfg.query_path = value.to_string(),
                "reset_method" => cfg.reset_method = value.to_ascii_uppercase(),
                "reset_path" => {
                    cfg.reset_path = (!value.is_empty()).then(|| value.to_string());
                }
                "auth_header" => {
                    let (name, val) = value.split_once(':').ok_or_else(|| {
                        HttpConfigError::BadValue { key: "auth_header", text: value.to_string() }
                    })?;
                    cfg.auth_header = Some((name.trim().to_string(), val.trim().to_string()));
                }
                "comparable_rows" => {
                    cfg.comparable_rows = parse_bool("comparable_rows", value)?;
                }
                "connect_timeout_ms" => {
                    cfg.connect_timeout = parse_ms("connect_timeout_ms", value)?;
                }
                "load_timeout_ms" => {
                    cfg.load_timeout = parse_ms("load_timeout_ms", value)?;
                }
                other => return Err(HttpConfigError::UnknownKey(other.to_string())),
            }
        }
        if cfg.base_url.is_empty() {
            return Err(HttpConfigError::MissingKey("base_url"));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }
}

fn parse_bool(key: &'static str, value: &str) -> Result<bool, HttpConfigError> {
    match value {
        "true" | "yes" => Ok(true),
        "false" | "no" => Ok(false),
        _ => Err(HttpConfigError::BadValue { key, text: value.to_string() }),
    }
}

fn parse_ms(key: &'static str, value: &str) -> Result<Duration, HttpConfigError> {
    value
        .parse::<u64>()
        .map(Duration::from_millis)
        .map_err(|_| HttpConfigError::BadValue { key, text: value.to_string() })
}

/// [`Driver`] that speaks plain HTTP per an [`HttpDriverConfig`].
pub struct HttpDriver {
    cfg: HttpDriverConfig,
    agent: ureq::Agent,
}

impl HttpDriver {
    pub fn new(cfg: HttpDriverConfig) -> Self {
        let agent_cfg = ureq::Agent::config_builder()
            .timeout_connect(Some(cfg.connect_timeout))
            .http_status_as_error(false)
            .build();
        HttpDriver { cfg, agent: ureq::Agent::new_with_config(agent_cfg) }
    }

    fn url(&self, template: &str, token: &str, value: &str) -> String {
        let base = self.cfg.base_url.trim_end_matches('/');
        let path = template.replace(token, value);
        if path.starts_with('/') {
            format!("{base}{path}")
        } else {
            format!("{base}/{path}")
        }
    }

    /// Sends one request and collapses the response to (status, content
    /// type, body). Methods beyond GET/DELETE/POST/PUT are rejected.
    fn send(
        &self,
        method: &str,
        url: &str,
        content_type: &str,
        body: &[u8],
        timeout: Duration,
    ) -> Result<(u16, String, String), DriverError> {
        let t = Some(timeout);
        let result = match method {
            "POST" | "PUT" => {
                let rb = if method == "POST" { self.agent.post(url) } else { self.agent.put(url) };
                let rb = rb.config().timeout_global(t).build();
                let rb = rb.header("content-type", content_type);
                self.authed_body(rb).send(body)
            }
            "GET" | "DELETE" => {
                let rb =
                    if method == "GET" { self.agent.get(url) } else { self.agent.delete(url) };
                let rb = rb.config().timeout_global(t).build();
                self.authed_plain(rb).call()
            }
            other => {
                return Err(DriverError::Rejected(format!("unsupported HTTP method {other:?}")))
            }
        };
        let mut resp = result.map_err(map_ureq_error)?;
        let status = resp.status().as_u16();
        let ctype = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_string();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| DriverError::Rejected(format!("unreadable response body: {e}")))?;
        Ok((status, ctype, text))
    }

    fn authed_body(
        &self,
        rb: ureq::RequestBuilder<ureq::typestate::WithBody>,
    ) -> ureq::RequestBuilder<ureq::typestate::WithBody> {
        match &self.cfg.auth_header {
            Some((name, value)) => rb.header(name, value),
            None => rb,
        }
    }

    fn authed_plain(
        &self,
        rb: ureq::RequestBuilder<ureq::typestate::WithoutBody>,
    ) -> ureq::RequestBuilder<ureq::typestate::WithoutBody> {
        match &self.cfg.auth_header {
            Some((name, value)) => rb.header(name, value),
            None => rb,
        }
    }
}

fn map_ureq_error(e: ureq::Error) -> DriverError {
    match e {
        ureq::Error::Timeout(_) => DriverError::Timeout,
        ureq::Error::Io(io)
            if matches!(
                io.kind(),
                std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
            ) =>
        {
            DriverError::Timeout
        }
        ureq::Error::Io(io) => DriverError::Unreachable(io.to_string()),
        ureq::Error::ConnectionFailed | ureq::Error::HostNotFound => {
            DriverError::Unreachable(e.to_string())
        }
        other => DriverError::Rejected(other.to_string()),
    }
}

fn snippet(text: &str) -> String {
    const LIMIT: usize = 200;
    let mut cut = text.trim().to_string();
    if cut.len() > LIMIT {
        let mut end = LIMIT;
        while !cut.is_char_boundary(end) {
            end -= 1;
        }
        cut.truncate(end);
        cut.push_str("...");
    }
    cut
}

impl Driver for HttpDriver {
    fn id(&self) -> String {
        format!("http:{}", self.cfg.base_url)
    }

    fn comparable_rows(&self) -> bool {
        self.cfg.comparable_rows
    }

    fn load_document(&mut self, doc: &NamedDoc) -> Result<(), DriverError> {
        let url = self.url(&self.cfg.load_path, "{name}", &doc.name);
        let (status, _, body) = self.send(
            &self.cfg.load_method.clone(),
            &url,
            "application/xml",
            &doc.bytes,
            self.cfg.load_timeout,
        )?;
        if (200..300).contains(&status) {
            Ok(())
        } else {
            Err(DriverError::Rejected(format!("HTTP {status}: {}", snippet(&body))))
        }
    }

    fn execute_query(&mut self, req: &QueryRequest) -> Result<QueryPayload, DriverError> {
        let url = self.url(&self.cfg.query_path, "{id}", &req.id.to_string());
        let (status, ctype, body) = self.send(
            &self.cfg.query_method.clone(),
            &url,
            "application/xquery",
            req.xquery.as_bytes(),
            req.timeout,
        )?;
        match status {
            200..=299 => {
                if self.cfg.comparable_rows && ctype.contains("json") {
                    let rows: QueryResult = serde_json::from_str(&body).map_err(|e| {
                        DriverError::Rejected(format!("unparseable result payload: {e}"))
                    })?;
                    Ok(QueryPayload::Rows(rows))
                } else {
                    Ok(QueryPayload::Opaque(body))
                }
            }
            408 | 504 => Err(DriverError::Timeout),
            _ => Err(DriverError::Rejected(format!("HTTP {status}: {}", snippet(&body)))),
        }
    }

    fn reset(&mut self) -> Result<(), DriverError> {
        let Some(path) = self.cfg.reset_path.clone() else { return Ok(()) };
        let url = self.url(&path, "{}", "");
        let (status, _, body) =
            self.send(&self.cfg.reset_method.clone(), &url, "text/plain", b"", self.cfg.load_timeout)?;
        if (200..300).contains(&status) {
            Ok(())
        } else {
            Err(DriverError::Rejected(format!("HTTP {status}: {}", snippet(&body))))
        }
    }
}
