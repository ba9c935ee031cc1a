//! HTJ: the native JSON interchange format for hierarchical tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Axis, HeadingAxis, HeadingNode, Label, LabelKind, Matrix, Stat, TableModel, Value,
};

pub const HTJ_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HtjDoc {
    pub htj_version: u32,
    pub row_headings: HtjAxis,
    pub column_headings: HtjAxis,
    pub entries: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<HtjMeta>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HtjAxis {
    pub level_names: Vec<String>,
    pub nodes: Vec<HtjNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HtjNode {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<Stat>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<HtjNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HtjMeta {
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema error at {pointer}: {message}")]
pub struct SchemaError {
    /// JSON pointer to the offending value (`""` for the document root).
    pub pointer: String,
    pub message: String,
}

impl SchemaError {
    fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            pointer: pointer.into(),
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        "SchemaError"
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Deserializes JSON text into `T`, reporting failures with a JSON pointer.
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        SchemaError::at(pointer, e.into_inner().to_string())
    })
}

fn to_node(n: &HtjNode) -> HeadingNode {
    let label = match n.derived {
        Some(stat) => Label {
            name: n.label.clone(),
            kind: LabelKind::Derived(stat),
        },
        None => Label::plain(n.label.clone()),
    };
    HeadingNode::new(label, n.children.iter().map(to_node).collect())
}

fn from_node(n: &HeadingNode) -> HtjNode {
    HtjNode {
        label: n.label.name.clone(),
        derived: match n.label.kind {
            LabelKind::Plain => None,
            LabelKind::Derived(s) => Some(s),
        },
        children: n.children.iter().map(from_node).collect(),
    }
}

fn axis_from(doc: &HtjAxis, pointer: &str) -> Result<HeadingAxis, SchemaError> {
    HeadingAxis::new(doc.nodes.iter().map(to_node).collect(), doc.level_names.clone())
        .map_err(|e| SchemaError::at(pointer, e.to_string()))
}

pub fn parse_htj(doc: &HtjDoc) -> Result<TableModel, SchemaError> {
    if doc.htj_version != HTJ_VERSION {
        return Err(SchemaError::at(
            "/htj_version",
            format!("unsupported version {}, expected {HTJ_VERSION}", doc.htj_version),
        ));
    }
    let rows = axis_from(&doc.row_headings, "/row_headings")?;
    let cols = axis_from(&doc.column_headings, "/column_headings")?;
    let (n_rows, n_cols) = (rows.leaf_count(), cols.leaf_count());
    if doc.entries.len() != n_rows {
        return Err(SchemaError::at(
            "/entries",
            format!(
                "{} entry rows for {n_rows} row leaves",
                doc.entries.len()
            ),
        ));
    }
    if let Some(i) = doc.entries.iter().position(|r| r.len() != n_cols) {
        return Err(SchemaError::at(
            format!("/entries/{i}"),
            format!(
                "{} entries for {n_cols} column leaves",
                doc.entries[i].len()
            ),
        ));
    }
    let entries = Matrix::from_rows(doc.entries.clone()).expect("checked rectangular");
    let model = TableModel::new(rows, cols, entries).map_err(|e| SchemaError::at("", e.to_string()))?;
    Ok(match &doc.meta {
        Some(meta) => model.with_version(meta.version),
        None => model,
    })
}

pub fn parse_htj_str(text: &str) -> Result<TableModel, SchemaError> {
    parse_htj(&from_json_str::<HtjDoc>(text)?)
}

pub fn serialize_htj(model: &TableModel) -> HtjDoc {
    let axis = |a: &HeadingAxis| HtjAxis {
        level_names: a.level_names().to_vec(),
        nodes: a.roots().iter().map(from_node).collect(),
    };
    HtjDoc {
        htj_version: HTJ_VERSION,
        row_headings: axis(model.row_axis()),
        column_headings: axis(model.axis(Axis::Col)),
        entries: model.entries().iter_rows().map(<[Value]>::to_vec).collect(),
        meta: Some(HtjMeta {
            version: model.version(),
        }),
    }
}

/// Canonical text form: pretty-printed, fixed key order, trailing newline.
pub fn to_htj_string(model: &TableModel) -> String {
    let mut s = serde_json::to_string_pretty(&serialize_htj(model)).expect("HTJ is always serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    #[test]
    fn round_trips_the_fixture() {
        let m = fixture::regional_sales();
        let text = to_htj_string(&m);
        let back = parse_htj_str(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_htj_string(&back), text);
    }

    #[test]
    fn short_entries_are_a_schema_error() {
        let mut doc = serialize_htj(&fixture::regional_sales());
        doc.entries.pop();
        let err = parse_htj(&doc).unwrap_err();
        assert_eq!(err.pointer, "/entries");
        assert!(err.message.contains("7 entry rows for 8"));
    }

    #[test]
    fn json_errors_carry_a_pointer() {
        let text = r#"{"htj_version":1,"row_headings":{"level_names":["r"],"nodes":[{"label":3}]},
            "column_headings":{"level_names":["c"],"nodes":[{"label":"x"}]},"entries":[[1]]}"#;
        let err = parse_htj_str(text).unwrap_err();
        assert_eq!(err.pointer, "/row_headings/nodes/0/label");
    }

    #[test]
    fn minimal_document() {
        let m = fixture::flat(&["r"], &["c"], vec![vec![f64::NAN]]);
        assert_eq!(m.entry(0, 0), &Value::Missing);
        let text = to_htj_string(&m);
        let want = r#"{
  "htj_version": 1,
  "row_headings": {
    "level_names": [
      "row-level-1"
    ],
    "nodes": [
      {
        "label": "r"
      }
    ]
  },
  "column_headings": {
    "level_names": [
      "col-level-1"
    ],
    "nodes": [
      {
        "label": "c"
      }
    ]
  },
  "entries": [
    [
      null
    ]
  ],
  "meta": {
    "version": 1
  }
}
"#;
        assert_eq!(text, want);
    }

    #[test]
    fn derived_labels_survive() {
        let doc = serialize_htj(&fixture::regional_sales());
        let amp = &doc.column_headings.nodes[0].children[0];
        assert_eq!(amp.label, "&");
        assert_eq!(amp.derived, Some(Stat::Sum));
    }
}
