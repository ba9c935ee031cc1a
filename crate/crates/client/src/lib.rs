//! Typed async client for the hierarchical table HTTP API.

use std::collections::BTreeMap;

use hitailor_core::api::{
    ApiError, Bundle, EntriesPage, RecommendQuery, RecommendationJson, ScriptRequest, SessionState, StoredVis,
    VisualizeRequest, VisualizeResponse,
};
use hitailor_core::importer::{HtjDoc, TableDoc};
use hitailor_core::transform::TransformOp;
use hitailor_core::visgen::VisTemplate;
use reqwest::{Method, RequestBuilder, Response};
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    /// The server answered with an error document.
    #[error("{0}")]
    Api(ApiError),
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),
    #[error("unexpected response ({status}): {message}")]
    Decode { status: u16, message: String },
}

impl ClientError {
    /// The server's error code, if the server produced one.
    pub fn code(&self) -> Option<&str> {
        match self {
            ClientError::Api(e) => Some(&e.code),
            _ => None,
        }
    }

    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Api(e) => Some(e.status),
            ClientError::Decode { status, .. } => Some(*status),
            ClientError::Transport(e) => e.status().map(|s| s.as_u16()),
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// Entry ranges for [`Client::entries`]; `None` leaves the server default.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct PageRequest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_end: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col_end: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the server root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client::with_http(base, reqwest::Client::new())
    }

    pub fn with_http(base: impl Into<String>, http: reqwest::Client) -> Self {
        let mut base = base.into();
        while base.ends_with('/') {
            base.pop();
        }
        Client { base, http }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn request(&self, method: Method, path: &str) -> RequestBuilder {
        self.http.request(method, format!("{}{path}", self.base))
    }

    async fn send<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T> {
        decode(req.send().await?).await
    }

    pub async fn health(&self) -> Result<()> {
        let resp = self.request(Method::GET, "/health").send().await?;
        if resp.status().is_success() {
            Ok(())
        } else {
            Err(ClientError::Decode {
                status: resp.status().as_u16(),
                message: "health check failed".into(),
            })
        }
    }

    pub async fn templates(&self) -> Result<Vec<VisTemplate>> {
        self.send(self.request(Method::GET, "/templates")).await
    }

    pub async fn upload(&self, doc: &TableDoc) -> Result<SessionState> {
        self.send(self.request(Method::POST, "/tables").json(doc)).await
    }

    /// Uploads a document given as raw JSON text.
    pub async fn upload_json(&self, text: impl Into<String>) -> Result<SessionState> {
        let req = self
            .request(Method::POST, "/tables")
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(text.into());
        self.send(req).await
    }

    pub async fn session(&self, id: &str) -> Result<SessionState> {
        self.send(self.request(Method::GET, &format!("/tables/{id}"))).await
    }

    pub async fn delete(&self, id: &str) -> Result<()> {
        let resp = self.request(Method::DELETE, &format!("/tables/{id}")).send().await?;
        if resp.status().is_success() {
            Ok(())
        } else {
            Err(error_of(resp).await)
        }
    }

    pub async fn transform(&self, id: &str, op: &TransformOp) -> Result<SessionState> {
        self.send(self.request(Method::POST, &format!("/tables/{id}/transform")).json(op))
            .await
    }

    pub async fn script(&self, id: &str, ops: &[TransformOp]) -> Result<SessionState> {
        let body = ScriptRequest { ops: ops.to_vec() };
        self.send(self.request(Method::POST, &format!("/tables/{id}/script")).json(&body))
            .await
    }

    pub async fn undo(&self, id: &str) -> Result<SessionState> {
        self.send(self.request(Method::POST, &format!("/tables/{id}/undo"))).await
    }

    pub async fn redo(&self, id: &str) -> Result<SessionState> {
        self.send(self.request(Method::POST, &format!("/tables/{id}/redo"))).await
    }

    pub async fn recommend(&self, id: &str, query: &RecommendQuery) -> Result<Vec<RecommendationJson>> {
        self.send(self.request(Method::GET, &format!("/tables/{id}/recommend")).query(query))
            .await
    }

    pub async fn visualize(&self, id: &str, req: &VisualizeRequest) -> Result<VisualizeResponse> {
        self.send(self.request(Method::POST, &format!("/tables/{id}/visualize")).json(req))
            .await
    }

    pub async fn visualizations(&self, id: &str) -> Result<BTreeMap<String, StoredVis>> {
        self.send(self.request(Method::GET, &format!("/tables/{id}/visualizations")))
            .await
    }

    pub async fn export_htj(&self, id: &str) -> Result<HtjDoc> {
        self.send(
            self.request(Method::GET, &format!("/tables/{id}/export"))
                .query(&[("format", "htj")]),
        )
        .await
    }

    pub async fn export_bundle(&self, id: &str) -> Result<Bundle> {
        self.send(
            self.request(Method::GET, &format!("/tables/{id}/export"))
                .query(&[("format", "bundle")]),
        )
        .await
    }

    pub async fn entries(&self, id: &str, page: PageRequest) -> Result<EntriesPage> {
        self.send(self.request(Method::GET, &format!("/tables/{id}/entries")).query(&page))
            .await
    }
}

async fn error_of(resp: Response) -> ClientError {
    let status = resp.status().as_u16();
    match resp.text().await {
        Ok(text) => match serde_json::from_str::<ApiError>(&text) {
            Ok(e) => ClientError::Api(e.with_status(status)),
            Err(_) => ClientError::Decode { status, message: text },
        },
        Err(e) => ClientError::Transport(e),
    }
}

async fn decode<T: DeserializeOwned>(resp: Response) -> Result<T> {
    let status = resp.status();
    if !status.is_success() {
        return Err(error_of(resp).await);
    }
    let bytes = resp.bytes().await?;
    serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode {
        status: status.as_u16(),
        message: e.to_string(),
    })
}
