//! In-process HTTP backend double for adapter tests: stores uploaded
//! documents, answers canned per-query responses, and injects configurable
//! latency or faults.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use tiny_http::{Header, Method, Response, Server};

use crate::engine::QueryResult;

/// What the mock answers for one query id.
#[derive(Debug, Clone, PartialEq)]
pub enum CannedResponse {
    /// 200 with the JSON encoding of typed rows.
    Rows(QueryResult),
    /// 200 with an arbitrary text body (opaque to the harness).
    Text(String),
    /// An injected HTTP fault.
    Fault(u16, String),
}

#[derive(Default)]
struct MockState {
    documents: HashMap<String, Vec<u8>>,
    responses: HashMap<String, CannedResponse>,
    latency: Duration,
}

/// The running mock server. It listens on an ephemeral localhost port from
/// construction until drop (or [`MockBackend::shutdown`]).
///
/// Routes: `PUT /documents/{name}` stores a document, `POST /queries/{id}`
/// answers the canned response (404 when none is set), `POST /reset` clears
/// stored documents. Every response is delayed by the configured latency.
pub struct MockBackend {
    base_url: String,
    state: Arc<Mutex<MockState>>,
    stop: Arc<AtomicBool>,
    worker: Option<JoinHandle<()>>,
}

impl MockBackend {
    pub fn start() -> std::io::Result<MockBackend> {
        let server = Server::http("127.0.0.1:0")
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("mock bound to a non-IP address"))?;
        let state = Arc::new(Mutex::new(MockState::default()));
        let stop = Arc::new(AtomicBool::new(false));
        let worker = {
            let state = Arc::clone(&state);
            let stop = Arc::clone(&stop);
            std::thread::spawn(move || serve(&server, &state, &stop))
        };
        Ok(MockBackend {
            base_url: format!("http://{addr}"),
            state,
            stop,
            worker: Some(worker),
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// Delay applied to every response, for timeout and floor tests.
    pub fn set_latency(&self, latency: Duration) {
        self.lock().latency = latency;
    }

    pub fn set_response(&self, query: &str, response: CannedResponse) {
        self.lock().responses.insert(query.to_string(), response);
    }

    pub fn document_count(&self) -> usize {
        self.lock().documents.len()
    }

    pub fn document(&self, name: &str) -> Option<Vec<u8>> {
        self.lock().documents.get(name).cloned()
    }

    pub fn shutdown(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        if let Some(worker) = self.worker.take() {
            let _ = worker.join();
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, MockState> {
        self.state.lock().expect("mock state lock")
    }
}

impl Drop for MockBackend {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn serve(server: &Server, state: &Mutex<MockState>, stop: &AtomicBool) {
    while !stop.load(Ordering::SeqCst) {
        match server.recv_timeout(Duration::from_millis(20)) {
            Ok(Some(rq)) => handle(rq, state),
            Ok(None) => {}
            Err(_) => break,
        }
    }
}

fn handle(mut rq: tiny_http::Request, state: &Mutex<MockState>) {
    let mut body = Vec::new();
    let _ = rq.as_reader().read_to_end(&mut body);
    let method = rq.method().clone();
    let url = rq.url().to_string();

    let latency = state.lock().expect("mock state lock").latency;
    if latency > Duration::ZERO {
        std::thread::sleep(latency);
    }

    let (code, ctype, text) = route(&method, &url, body, state);
    let header = Header::from_bytes(&b"Content-Type"[..], ctype.as_bytes())
        .expect("static header is valid");
    let _ = rq.respond(Response::from_string(text).with_status_code(code).with_header(header));
}

fn route(
    method: &Method,
    url: &str,
    body: Vec<u8>,
    state: &Mutex<MockState>,
) -> (u16, &'static str, String) {
    let mut st = state.lock().expect("mock state lock");
    if let Some(name) = url.strip_prefix("/documents/") {
        if *method == Method::Put && !name.is_empty() {
            st.documents.insert(name.to_string(), body);
            return (204, "text/plain", String::new());
        }
    }
    if let Some(id) = url.strip_prefix("/queries/") {
        if *method == Method::Post {
            return match st.responses.get(id) {
                Some(CannedResponse::Rows(rows)) => {
                    let json = serde_json::to_string(rows).expect("result serializes");
                    (200, "application/json", json)
                }
                Some(CannedResponse::Text(text)) => (200, "text/plain", text.clone()),
                Some(CannedResponse::Fault(code, text)) => (*code, "text/plain", text.clone()),
                None => (404, "text/plain", format!("no canned response for {id}")),
            };
        }
    }
    if url == "/reset" && *method == Method::Post {
        st.documents.clear();
        return (204, "text/plain", String::new());
    }
    (404, "text/plain", format!("no route for {method} {url}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn agent() -> ureq::Agent {
        let cfg = ureq::Agent::config_builder().http_status_as_error(false).build();
        ureq::Agent::new_with_config(cfg)
    }

    #[test]
    fn stores_documents_and_answers_canned_queries() {
        let mock = MockBackend::start().unwrap();
        let agent = agent();

        let url = format!("{}/documents/d_date.xml", mock.base_url());
        let resp = agent.put(&url).send(&b"<dimension/>"[..]).unwrap();
        assert_eq!(resp.status().as_u16(), 204);
        assert_eq!(mock.document("d_date.xml").as_deref(), Some(&b"<dimension/>"[..]));

        mock.set_response(
            "Q09",
            CannedResponse::Rows(QueryResult {
                columns: vec!["p_name".into(), "max_f_quantity".into()],
                key_count: 1,
                rows: vec![vec![Value::Str("Brand#13".into()), Value::Int(9)]],
            }),
        );
        let mut resp =
            agent.post(&format!("{}/queries/Q09", mock.base_url())).send(&b"..."[..]).unwrap();
        assert_eq!(resp.status().as_u16(), 200);
        let parsed: QueryResult =
            serde_json::from_str(&resp.body_mut().read_to_string().unwrap()).unwrap();
        assert_eq!(parsed.rows[0][1], Value::Int(9));

        let resp = agent.post(&format!("{}/reset", mock.base_url())).send(&b""[..]).unwrap();
        assert_eq!(resp.status().as_u16(), 204);
        assert_eq!(mock.document_count(), 0);
    }

    #[test]
    fn unknown_routes_and_queries_get_404() {
        let mock = MockBackend::start().unwrap();
        let agent = agent();
        let resp = agent.get(&format!("{}/nope", mock.base_url())).call().unwrap();
        assert_eq!(resp.status().as_u16(), 404);
        let resp =
            agent.post(&format!("{}/queries/Q01", mock.base_url())).send(&b""[..]).unwrap();
        assert_eq!(resp.status().as_u16(), 404);
    }

    #[test]
    fn shutdown_is_idempotent_and_clean() {
        let mut mock = MockBackend::start().unwrap();
        mock.shutdown();
        mock.shutdown();
    }
}
