//! Reading and writing table documents.

mod grid;
mod htj;

pub use grid::{grid_from_csv, parse_grid, parse_value, GridCell, GridDoc, GridError, Merge};
pub use htj::{
    from_json_str, parse_htj, parse_htj_str, serialize_htj, to_htj_string, HtjAxis, HtjDoc,
    HtjMeta, HtjNode, SchemaError, HTJ_VERSION,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::TableModel;

/// Any document the importer accepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableDoc {
    Grid(GridDoc),
    Htj(HtjDoc),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImportError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

impl ImportError {
    pub fn code(&self) -> &'static str {
        match self {
            ImportError::Grid(e) => e.code(),
            ImportError::Schema(e) => e.code(),
        }
    }
}

pub fn parse_doc(doc: &TableDoc) -> Result<TableModel, ImportError> {
    Ok(match doc {
        TableDoc::Grid(g) => parse_grid(g)?,
        TableDoc::Htj(h) => parse_htj(h)?,
    })
}

/// Parses JSON text holding either an HTJ document or a grid document.
/// Documents with an `htj_version` key are HTJ; everything else is read as a grid.
pub fn parse_doc_str(text: &str) -> Result<TableModel, ImportError> {
    let probe: serde_json::Value =
        serde_json::from_str(text).map_err(|e| SchemaError {
            pointer: String::new(),
            message: e.to_string(),
        })?;
    if probe.get("htj_version").is_some() {
        Ok(parse_htj_str(text)?)
    } else {
        let grid: GridDoc = from_json_str(text)?;
        Ok(parse_grid(&grid)?)
    }
}

/// The sample table as a grid: 2 heading rows, 3 heading columns.
pub fn fixture_grid() -> GridDoc {
    let model = crate::fixture::regional_sales();
    let mut cells = vec![GridCell::new(0, 0, "").spanning(2, 3)];
    let mut col = 3;
    for year in model.col_axis().roots() {
        let n = year.children.len();
        cells.push(GridCell::new(0, col, year.name()).spanning(1, n));
        for (i, s) in year.children.iter().enumerate() {
            cells.push(GridCell::new(1, col + i, s.name()));
        }
        col += n;
    }
    let mut row = 2;
    for cont in model.row_axis().roots() {
        cells.push(GridCell::new(row, 0, cont.name()).spanning(cont.leaf_count(), 1));
        for country in &cont.children {
            cells.push(GridCell::new(row, 1, country.name()).spanning(country.leaf_count(), 1));
            for city in &country.children {
                cells.push(GridCell::new(row, 2, city.name()));
                row += 1;
            }
        }
    }
    for (r, values) in model.entries().iter_rows().enumerate() {
        for (c, v) in values.iter().enumerate() {
            let text = match v {
                crate::model::Value::Number(x) => x.to_string(),
                crate::model::Value::Text(t) => t.clone(),
                crate::model::Value::Missing => String::new(),
            };
            cells.push(GridCell::new(r + 2, c + 3, text));
        }
    }
    GridDoc {
        n_heading_rows: 2,
        n_heading_cols: 3,
        width: 3 + model.shape().1,
        height: 2 + model.shape().0,
        cells,
        row_level_names: Some(model.row_axis().level_names().to_vec()),
        col_level_names: Some(model.col_axis().level_names().to_vec()),
    }
}
