//! Turning table units into chart documents.

mod catalog;
mod emit;

pub use catalog::{find_template, template_catalog, Aggregation, Category, ChannelSpec, Orientation, VisTemplate};
pub use emit::{emit_spec, rebind_all, VEGA_LITE_SCHEMA};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::locator::{AxisIndex, TableUnit};
use crate::model::{Axis, Matrix, TableModel, Value};

/// What a decomposed unit offers to visual channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    XNominal,
    YNominal,
    Value,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VisConfig {
    pub template_id: String,
    pub bindings: BTreeMap<String, Role>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub options: BTreeMap<String, serde_json::Value>,
}

impl VisConfig {
    pub fn new(template_id: &str, bindings: &[(&str, Role)]) -> Self {
        VisConfig {
            template_id: template_id.to_string(),
            bindings: bindings.iter().map(|(c, r)| (c.to_string(), *r)).collect(),
            options: BTreeMap::new(),
        }
    }

    pub fn with_option(mut self, key: &str, value: serde_json::Value) -> Self {
        self.options.insert(key.to_string(), value);
        self
    }

    fn option_str(&self, key: &str) -> Option<&str> {
        self.options.get(key).and_then(|v| v.as_str())
    }
}

/// Pixel size of one table cell; chart geometry is a multiple of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSize {
    pub width: f64,
    pub height: f64,
}

impl Default for CellSize {
    fn default() -> Self {
        CellSize {
            width: 80.0,
            height: 24.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisGrammarDoc {
    pub doc: serde_json::Value,
    pub geometry: Geometry,
    pub unit: TableUnit,
}

impl VisGrammarDoc {
    /// Canonical bytes: pretty JSON with sorted keys and a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.doc).expect("documents serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub x_nominal: Vec<String>,
    pub y_nominal: Vec<String>,
    pub values: Matrix<Value>,
    pub row_label_paths: Vec<Vec<String>>,
    pub col_label_paths: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VisError {
    #[error("unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("template has no channel {channel:?}")]
    UnknownChannel { channel: String },
    #[error("channel {channel:?} cannot show {role:?}")]
    ForbiddenBinding { channel: String, role: Role },
    #[error("required channel {channel:?} is unbound")]
    MissingChannel { channel: String },
    #[error("unit shape does not fit the template: {0}")]
    ShapeError(String),
    #[error("no values to summarize")]
    EmptyInput,
    #[error("non-numeric value: {0}")]
    NonNumeric(String),
    #[error("negative value {0} cannot be drawn as an angle or radius")]
    NegativeValue(String),
}

impl VisError {
    pub fn code(&self) -> &'static str {
        match self {
            VisError::UnknownTemplate(_) => "UnknownTemplate",
            VisError::UnknownChannel { .. } => "UnknownChannel",
            VisError::ForbiddenBinding { .. } => "ForbiddenBinding",
            VisError::MissingChannel { .. } => "MissingChannel",
            VisError::ShapeError(_) => "ShapeError",
            VisError::EmptyInput => "EmptyInput",
            VisError::NonNumeric(_) => "NonNumeric",
            VisError::NegativeValue(_) => "NegativeValue",
        }
    }
}

pub fn decompose(model: &TableModel, unit: &TableUnit) -> Decomposition {
    let b = unit.block;
    let paths = |axis: Axis, range: std::ops::Range<usize>| -> Vec<Vec<String>> {
        let idx = AxisIndex::new(model, axis);
        range
            .map(|k| {
                let leaf = idx.leaf_node(k).expect("unit inside the table");
                idx.path(leaf).into_iter().map(str::to_string).collect()
            })
            .collect()
    };
    let row_label_paths = paths(Axis::Row, b.rows());
    let col_label_paths = paths(Axis::Col, b.cols());
    let last = |p: &Vec<String>| p.last().cloned().unwrap_or_default();
    Decomposition {
        x_nominal: col_label_paths.iter().map(last).collect(),
        y_nominal: row_label_paths.iter().map(last).collect(),
        values: Matrix::from_fn(b.height(), b.width(), |r, c| {
            model.entry(b.row_start + r, b.col_start + c).clone()
        }),
        row_label_paths,
        col_label_paths,
    }
}

/// Checks bindings against the template's channel table.
pub fn validate_mapping(template: &VisTemplate, config: &VisConfig, _decomp: &Decomposition) -> Result<(), VisError> {
    for (channel, role) in &config.bindings {
        let spec = template.channel(channel).ok_or_else(|| VisError::UnknownChannel {
            channel: channel.clone(),
        })?;
        if !spec.accepted_roles.contains(role) {
            return Err(VisError::ForbiddenBinding {
                channel: channel.clone(),
                role: *role,
            });
        }
    }
    for c in &template.channels {
        if c.required && !config.bindings.contains_key(&c.channel_name) {
            return Err(VisError::MissingChannel {
                channel: c.channel_name.clone(),
            });
        }
    }
    if template.is_paired() {
        let (x, y) = (config.bindings["x"], config.bindings["y"]);
        if (x == Role::Value) == (y == Role::Value) {
            return Err(VisError::ForbiddenBinding {
                channel: "y".to_string(),
                role: y,
            });
        }
    }
    Ok(())
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Order statistics with linear interpolation at `p * (n - 1)`.
pub fn summary_stats(values: &[f64]) -> Result<SummaryStats, VisError> {
    if values.is_empty() {
        return Err(VisError::EmptyInput);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(SummaryStats {
        min: v[0],
        max: v[v.len() - 1],
        mean: v.iter().sum::<f64>() / v.len() as f64,
        median: quantile(&v, 0.5),
        q1: quantile(&v, 0.25),
        q3: quantile(&v, 0.75),
        n: v.len(),
    })
}

/// Min-max normalization over the whole set; a constant set maps to 0.5.
/// Missing values stay missing and do not affect the range.
pub fn normalize_unit_values<T: Clone>(cells: &[(T, Value)]) -> Result<Vec<(T, Option<f64>)>, VisError> {
    let (lo, hi) = value_domain(cells.iter().map(|(_, v)| v))?;
    Ok(cells
        .iter()
        .map(|(k, v)| (k.clone(), v.as_number().map(|x| normalize(x, lo, hi))))
        .collect())
}

/// Smallest and largest number among `values`.
pub fn value_domain<'a>(values: impl IntoIterator<Item = &'a Value>) -> Result<(f64, f64), VisError> {
    let mut dom: Option<(f64, f64)> = None;
    for v in values {
        match v {
            Value::Number(x) => {
                dom = Some(dom.map_or((*x, *x), |(lo, hi)| (lo.min(*x), hi.max(*x))));
            }
            Value::Text(t) => return Err(VisError::NonNumeric(t.clone())),
            Value::Missing => {}
        }
    }
    dom.ok_or(VisError::EmptyInput)
}

pub fn normalize(x: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (x - lo) / (hi - lo)
    } else {
        0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::regional_sales;
    use crate::locator::{seq, Block, Locator};

    #[test]
    fn decompose_a_block() {
        let m = regional_sales();
        let u = TableUnit::from_block(&m, Block::new(4..6, 4..6)).unwrap();
        let d = decompose(&m, &u);
        assert_eq!(d.x_nominal, ["spr", "aut"]);
        assert_eq!(d.y_nominal, ["PAR", "MRS"]);
        assert_eq!(d.values.row(0), [Value::Number(99.0), Value::Number(90.0)]);
        assert_eq!(d.row_label_paths[1], ["Europe", "FRA", "MRS"]);
    }

    #[test]
    fn decompose_a_cell_and_the_table() {
        let m = regional_sales();
        let u = TableUnit::from_locators(
            &m,
            &Locator::single(seq(&["Asia", "CHN", "SHA"])),
            &Locator::single(seq(&["2020", "spr"])),
        )
        .unwrap();
        let d = decompose(&m, &u);
        assert_eq!((d.x_nominal, d.y_nominal), (vec!["spr".to_string()], vec!["SHA".to_string()]));
        assert_eq!(d.values.get(0, 0), &Value::Number(131.0));
        let all = decompose(&m, &TableUnit::from_block(&m, Block::new(0..8, 0..6)).unwrap());
        assert_eq!((all.y_nominal.len(), all.x_nominal.len()), (8, 6));
    }

    #[test]
    fn mapping_rules() {
        let m = regional_sales();
        let d = decompose(&m, &TableUnit::from_block(&m, Block::new(4..6, 3..6)).unwrap());
        let stacked = find_template("stacked_bar").unwrap();
        let ok = VisConfig::new(
            "stacked_bar",
            &[("x", Role::XNominal), ("height", Role::Value), ("color", Role::YNominal)],
        );
        assert!(validate_mapping(&stacked, &ok, &d).is_ok());
        let bad = VisConfig::new(
            "stacked_bar",
            &[("x", Role::YNominal), ("height", Role::Value), ("color", Role::YNominal)],
        );
        assert_eq!(validate_mapping(&stacked, &bad, &d).unwrap_err().code(), "ForbiddenBinding");
        let boxp = find_template("box_plot").unwrap();
        let missing = VisConfig::new("box_plot", &[("x", Role::XNominal)]);
        assert_eq!(validate_mapping(&boxp, &missing, &d).unwrap_err().code(), "MissingChannel");
        let both_labels = VisConfig::new("box_plot", &[("x", Role::XNominal), ("y", Role::YNominal)]);
        assert_eq!(validate_mapping(&boxp, &both_labels, &d).unwrap_err().code(), "ForbiddenBinding");
    }

    #[test]
    fn stats_by_linear_interpolation() {
        let s = summary_stats(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((s.min, s.max, s.mean, s.median), (1.0, 4.0, 2.5, 2.5));
        assert_eq!((s.q1, s.q3, s.n), (1.75, 3.25, 4));
        let one = summary_stats(&[5.0]).unwrap();
        assert_eq!((one.min, one.q1, one.median, one.q3, one.max, one.mean), (5.0, 5.0, 5.0, 5.0, 5.0, 5.0));
        assert_eq!(summary_stats(&[]).unwrap_err(), VisError::EmptyInput);
    }

    #[test]
    fn normalization() {
        let cells: Vec<(u8, Value)> = vec![(0, 1.0.into()), (1, 3.0.into()), (2, 5.0.into())];
        let n: Vec<f64> = normalize_unit_values(&cells).unwrap().into_iter().map(|(_, v)| v.unwrap()).collect();
        assert_eq!(n, [0.0, 0.5, 1.0]);
        let same: Vec<(u8, Value)> = vec![(0, 7.0.into()), (1, 7.0.into())];
        assert!(normalize_unit_values(&same).unwrap().iter().all(|(_, v)| *v == Some(0.5)));
        let text = vec![(0u8, Value::Text("a".into()))];
        assert_eq!(normalize_unit_values(&text).unwrap_err().code(), "NonNumeric");
    }
}
