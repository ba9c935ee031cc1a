//! Wire types shared by the HTTP service, its client and the command line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::importer::{HtjDoc, ImportError};
use crate::locator::{Block, Locator, LocatorError, TableUnit};
use crate::model::{Axis, TableModel, Value};
use crate::recommend::{Mechanism, PriorityRange, RecommendError, Recommendation};
use crate::structure::{detect_structure, StructureAnnotation};
use crate::transform::{ScriptError, TransformError, TransformOp};
use crate::visgen::{CellSize, VisConfig, VisError, VisGrammarDoc};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisSummary {
    pub depth: usize,
    pub leaf_count: usize,
    pub level_names: Vec<String>,
    pub structure: StructureAnnotation,
}

impl AxisSummary {
    pub fn of(model: &TableModel, axis: Axis) -> Self {
        let h = model.axis(axis);
        AxisSummary {
            depth: h.depth(),
            leaf_count: h.leaf_count(),
            level_names: h.level_names().to_vec(),
            structure: detect_structure(h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub version: u64,
    pub rows: usize,
    pub cols: usize,
    pub row_axis: AxisSummary,
    pub col_axis: AxisSummary,
}

impl ModelSummary {
    pub fn of(model: &TableModel) -> Self {
        let (rows, cols) = model.shape();
        ModelSummary {
            version: model.version(),
            rows,
            cols,
            row_axis: AxisSummary::of(model, Axis::Row),
            col_axis: AxisSummary::of(model, Axis::Col),
        }
    }

    /// One-line human summary, e.g. `8x6; rows: 3 levels, hierarchy; cols: 2 levels, column bicluster at level 1`.
    pub fn describe(&self) -> String {
        let axis = |name: &str, a: &AxisSummary| {
            let kind = match a.structure.bicluster_from {
                Some(k) => format!("{name} bicluster at level {k}"),
                None => "hierarchy".to_string(),
            };
            format!("{} levels, {kind}", a.depth)
        };
        format!(
            "{}x{}; rows: {}; cols: {}",
            self.rows,
            self.cols,
            axis("row", &self.row_axis),
            axis("column", &self.col_axis)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: String,
    pub summary: ModelSummary,
    pub history_len: usize,
    pub can_redo: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptRequest {
    pub ops: Vec<TransformOp>,
}

/// A unit given either by locators or by leaf ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitRef {
    Locators { row: Locator, col: Locator },
    Block { block: Block },
}

impl UnitRef {
    pub fn resolve(&self, model: &TableModel) -> Result<TableUnit, LocatorError> {
        match self {
            UnitRef::Locators { row, col } => TableUnit::from_locators(model, row, col),
            UnitRef::Block { block } => TableUnit::from_block(model, *block),
        }
    }
}

/// Query string of the recommend endpoint. Locators are JSON-encoded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendQuery {
    pub row: String,
    pub col: String,
    #[serde(default)]
    pub mechanism: Option<Mechanism>,
    #[serde(default)]
    pub row_lo: Option<usize>,
    #[serde(default)]
    pub row_hi: Option<usize>,
    #[serde(default)]
    pub col_lo: Option<usize>,
    #[serde(default)]
    pub col_hi: Option<usize>,
}

impl RecommendQuery {
    pub fn new(row: &Locator, col: &Locator, mechanism: Mechanism) -> Self {
        RecommendQuery {
            row: serde_json::to_string(row).expect("locators serialize"),
            col: serde_json::to_string(col).expect("locators serialize"),
            mechanism: Some(mechanism),
            row_lo: None,
            row_hi: None,
            col_lo: None,
            col_hi: None,
        }
    }

    pub fn with_ranges(mut self, row: PriorityRange, col: PriorityRange) -> Self {
        self.row_lo = Some(row.lo);
        self.row_hi = Some(row.hi);
        self.col_lo = Some(col.lo);
        self.col_hi = Some(col.hi);
        self
    }

    pub fn row_range(&self) -> PriorityRange {
        PriorityRange::new(self.row_lo.unwrap_or(0), self.row_hi.unwrap_or(usize::MAX))
    }

    pub fn col_range(&self) -> PriorityRange {
        PriorityRange::new(self.col_lo.unwrap_or(0), self.col_hi.unwrap_or(usize::MAX))
    }

    pub fn locators(&self) -> Result<(Locator, Locator), ApiError> {
        let parse = |name: &str, text: &str| {
            serde_json::from_str::<Locator>(text).map_err(|e| {
                ApiError::bad_request("BadLocator", format!("{name} locator: {e}"))
            })
        };
        Ok((parse("row", &self.row)?, parse("col", &self.col)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecommendationJson {
    pub block: Block,
    pub row_priority: usize,
    pub col_priority: usize,
    pub row_locator: Locator,
    pub col_locator: Locator,
}

impl From<&Recommendation> for RecommendationJson {
    fn from(r: &Recommendation) -> Self {
        RecommendationJson {
            block: r.unit.block,
            row_priority: r.priority.row,
            col_priority: r.priority.col,
            row_locator: r.unit.row_locator.clone(),
            col_locator: r.unit.col_locator.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplyTo {
    #[default]
    Selection,
    Recommended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ranges {
    pub row: PriorityRange,
    pub col: PriorityRange,
}

impl Default for Ranges {
    fn default() -> Self {
        Ranges {
            row: PriorityRange::full(),
            col: PriorityRange::full(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisualizeRequest {
    pub unit: UnitRef,
    pub config: VisConfig,
    #[serde(default)]
    pub apply_to: ApplyTo,
    #[serde(default)]
    pub mechanism: Option<Mechanism>,
    #[serde(default)]
    pub ranges: Option<Ranges>,
    #[serde(default)]
    pub cell: Option<CellSize>,
    /// Name to store the configuration under; defaults to `config-<n>`.
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualizeResponse {
    pub config_name: String,
    pub docs: Vec<VisGrammarDoc>,
}

/// A stored visualization: the request that produced it and its documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredVis {
    pub request: VisualizeRequest,
    pub docs: Vec<VisGrammarDoc>,
}

/// Everything needed to reproduce a session's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub initial: HtjDoc,
    pub ops: Vec<TransformOp>,
    pub model: HtjDoc,
    pub configs: BTreeMap<String, VisConfig>,
    pub docs: BTreeMap<String, Vec<VisGrammarDoc>>,
}

/// A rectangular slice of entries with the label paths of its leaves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntriesPage {
    pub block: Block,
    pub row_paths: Vec<Vec<String>>,
    pub col_paths: Vec<Vec<String>>,
    pub values: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
    /// HTTP status; carried out of band.
    #[serde(skip, default = "unprocessable")]
    pub status: u16,
}

fn unprocessable() -> u16 {
    422
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        ApiError {
            code: code.to_string(),
            message: message.into(),
            detail: None,
            status: 422,
        }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        ApiError::new(code, message).with_status(400)
    }

    pub fn with_status(mut self, status: u16) -> Self {
        self.status = status;
        self
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn not_found(session: &str) -> Self {
        ApiError::new("UnknownSession", format!("no session {session:?}")).with_status(404)
    }
}

impl From<ImportError> for ApiError {
    fn from(e: ImportError) -> Self {
        let detail = match &e {
            ImportError::Schema(s) => Some(serde_json::json!({ "pointer": s.pointer })),
            ImportError::Grid(_) => None,
        };
        ApiError {
            code: e.code().to_string(),
            message: e.to_string(),
            detail,
            status: 400,
        }
    }
}

impl From<LocatorError> for ApiError {
    fn from(e: LocatorError) -> Self {
        ApiError::bad_request(e.code(), e.to_string())
    }
}

impl From<TransformError> for ApiError {
    fn from(e: TransformError) -> Self {
        ApiError::new(e.code(), e.to_string())
    }
}

impl From<ScriptError> for ApiError {
    fn from(e: ScriptError) -> Self {
        ApiError::new(e.error.code(), e.to_string()).with_detail(serde_json::json!({
            "index": e.index,
            "last_good_version": e.last_good.version(),
        }))
    }
}

impl From<RecommendError> for ApiError {
    fn from(e: RecommendError) -> Self {
        match e {
            RecommendError::Locator(l) => l.into(),
            other => ApiError::new(other.code(), other.to_string()),
        }
    }
}

impl From<VisError> for ApiError {
    fn from(e: VisError) -> Self {
        let detail = match &e {
            VisError::ForbiddenBinding { channel, role } => {
                Some(serde_json::json!({ "channel": channel, "role": role }))
            }
            VisError::MissingChannel { channel } | VisError::UnknownChannel { channel } => {
                Some(serde_json::json!({ "channel": channel }))
            }
            _ => None,
        };
        ApiError {
            code: e.code().to_string(),
            message: e.to_string(),
            detail,
            status: 422,
        }
    }
}
