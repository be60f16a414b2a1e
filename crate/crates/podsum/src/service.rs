//! HTTP client for the model-server wire protocol.
//!
//! `POST /v1/summarize` and `POST /v1/embed` with JSON bodies, each request
//! carrying `X-Podsum-Proto: 1`. Non-200 answers carry `{"error": str}`.

use std::time::Duration;

use podsum_core::backend::{
    DecodeConfig, EmbedRequest, EmbedResponse, ErrorResponse, SummarizeRequest, SummarizeResponse,
    Summarizer, EMBED_PATH, PROTO_HEADER, PROTO_VERSION, SUMMARIZE_PATH,
};
use podsum_core::selector::{check_embeddings, ContextProvider};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{PodsumError, Result};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

#[derive(Debug, Clone)]
pub struct ServiceClient {
    base_url: String,
    agent: ureq::Agent,
}

impl ServiceClient {
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R> {
        let url = format!("{}{}", self.base_url, path);
        let transport = |e: ureq::Error| PodsumError::Transport {
            url: url.clone(),
            message: e.to_string(),
        };
        let mut response = self
            .agent
            .post(&url)
            .header(PROTO_HEADER, PROTO_VERSION)
            .header("Content-Type", "application/json")
            .send(serde_json::to_vec(body).expect("request serializes"))
            .map_err(transport)?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(transport)?;
        if status != 200 {
            let message = serde_json::from_str::<ErrorResponse>(&text)
                .map(|e| e.error)
                .unwrap_or(text);
            return Err(PodsumError::Protocol {
                url,
                status,
                message,
            });
        }
        serde_json::from_str(&text).map_err(|e| PodsumError::Protocol {
            url,
            status,
            message: format!("malformed response body: {e}"),
        })
    }

    pub fn summarize(&self, source: &str, config: &DecodeConfig) -> Result<String> {
        let request = SummarizeRequest {
            source: source.to_string(),
            config: *config,
        };
        let response: SummarizeResponse = self.post(SUMMARIZE_PATH, &request)?;
        Ok(response.summary)
    }

    /// One `dim`-wide vector per text; the response shape is checked.
    pub fn embed(&self, texts: &[&str], dim: usize) -> Result<Vec<Vec<f64>>> {
        let request = EmbedRequest {
            texts: texts.iter().map(|t| t.to_string()).collect(),
            dim,
        };
        let response: EmbedResponse = self.post(EMBED_PATH, &request)?;
        check_embeddings(&response.vectors, texts.len(), dim)?;
        Ok(response.vectors)
    }
}

impl Summarizer for ServiceClient {
    type Error = PodsumError;

    fn generate(&self, source: &str, config: &DecodeConfig) -> Result<String> {
        self.summarize(source, config)
    }
}

impl ContextProvider for ServiceClient {
    type Error = PodsumError;

    fn embed(&self, texts: &[&str], dim: usize) -> Result<Vec<Vec<f64>>> {
        ServiceClient::embed(self, texts, dim)
    }
}
