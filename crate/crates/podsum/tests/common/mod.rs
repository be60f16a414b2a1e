//! Fixture model server for client tests.
//!
//! Summarize answers with the first `min_length` source tokens (capped at
//! `max_length`); embed answers with hash vectors computed here from the
//! documented construction rather than through the library.

#![allow(dead_code)]

use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde_json::{json, Value};
use tiny_http::{Header, Response, Server};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fixture,
    ZeroVectors,
    /// Embed answers with one vector too few.
    ShortBatch,
    Fail(u16),
    /// Non-JSON error body.
    FailPlain(u16),
}

#[derive(Debug, Clone)]
pub struct Captured {
    pub path: String,
    pub proto: Option<String>,
    pub body: Value,
}

pub struct FixtureServer {
    server: Arc<Server>,
    handle: Option<JoinHandle<()>>,
    pub url: String,
    pub requests: Arc<Mutex<Vec<Captured>>>,
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub fn hash_vector(text: &str, dim: usize) -> Vec<f64> {
    let mut state = fnv1a64(text.as_bytes());
    let mut v = Vec::with_capacity(dim);
    for _ in 0..dim {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        v.push(2.0 * ((z >> 11) as f64 / 9007199254740992.0) - 1.0);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut v {
            *x /= norm;
        }
    }
    v
}

fn answer(mode: Mode, path: &str, body: &Value) -> (u16, String) {
    match mode {
        Mode::Fail(code) => {
            return (
                code,
                json!({"error": format!("fixture failure {code}")}).to_string(),
            )
        }
        Mode::FailPlain(code) => return (code, String::from("upstream exploded")),
        _ => {}
    }
    match path {
        "/v1/summarize" => {
            let source = body["source"].as_str().unwrap_or_default();
            let min = body["config"]["min_length"].as_u64().unwrap_or(0) as usize;
            let max = body["config"]["max_length"].as_u64().unwrap_or(0) as usize;
            let summary: Vec<&str> = source.split_whitespace().take(min.min(max)).collect();
            (200, json!({"summary": summary.join(" ")}).to_string())
        }
        "/v1/embed" => {
            let dim = body["dim"].as_u64().unwrap_or(0) as usize;
            let texts: Vec<&str> = body["texts"]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            let mut vectors: Vec<Vec<f64>> = match mode {
                Mode::ZeroVectors => texts.iter().map(|_| vec![0.0; dim]).collect(),
                _ => texts.iter().map(|t| hash_vector(t, dim)).collect(),
            };
            if mode == Mode::ShortBatch {
                vectors.pop();
            }
            (200, json!({ "vectors": vectors }).to_string())
        }
        other => (
            404,
            json!({"error": format!("no route {other}")}).to_string(),
        ),
    }
}

pub fn start(mode: Mode) -> FixtureServer {
    let server = Arc::new(Server::http("127.0.0.1:0").expect("bind fixture server"));
    let url = format!(
        "http://{}",
        server.server_addr().to_ip().expect("tcp address")
    );
    let requests = Arc::new(Mutex::new(Vec::new()));
    let (s, log) = (Arc::clone(&server), Arc::clone(&requests));
    let handle = std::thread::spawn(move || {
        for mut request in s.incoming_requests() {
            let mut raw = String::new();
            let _ = request.as_reader().read_to_string(&mut raw);
            let body: Value = serde_json::from_str(&raw).unwrap_or(Value::Null);
            let proto = request
                .headers()
                .iter()
                .find(|h| h.field.equiv("X-Podsum-Proto"))
                .map(|h| h.value.to_string());
            let path = request.url().to_string();
            let (status, text) = answer(mode, &path, &body);
            log.lock().unwrap().push(Captured { path, proto, body });
            let response = Response::from_string(text)
                .with_status_code(status)
                .with_header(Header::from_bytes("Content-Type", "application/json").unwrap());
            let _ = request.respond(response);
        }
    });
    FixtureServer {
        server,
        handle: Some(handle),
        url,
        requests,
    }
}
