//! Spreadsheet-style grids with explicit merged spans.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Axis, HeadingAxis, HeadingNode, Label, Matrix, ModelError, Stat, TableModel, Value,
};

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub row: usize,
    pub col: usize,
    #[serde(default = "one")]
    pub row_span: usize,
    #[serde(default = "one")]
    pub col_span: usize,
    #[serde(default)]
    pub text: String,
}

impl GridCell {
    pub fn new(row: usize, col: usize, text: impl Into<String>) -> Self {
        GridCell {
            row,
            col,
            row_span: 1,
            col_span: 1,
            text: text.into(),
        }
    }

    pub fn spanning(mut self, row_span: usize, col_span: usize) -> Self {
        self.row_span = row_span;
        self.col_span = col_span;
        self
    }

    fn row_end(&self) -> usize {
        self.row + self.row_span
    }

    fn col_end(&self) -> usize {
        self.col + self.col_span
    }
}

/// A rectangular grid whose top `n_heading_rows` rows and left `n_heading_cols`
/// columns hold headings. Cells must tile the grid exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDoc {
    pub n_heading_rows: usize,
    pub n_heading_cols: usize,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<GridCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_level_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col_level_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("cell at ({row}, {col}) overlaps another cell")]
    Overlap { row: usize, col: usize },
    #[error("heading {text:?} at ({row}, {col}) is not nested inside a single parent span")]
    OrphanHeading {
        row: usize,
        col: usize,
        text: String,
    },
    #[error("grid shape error: {0}")]
    Shape(String),
    #[error("heading cell at ({row}, {col}) is empty")]
    EmptyLabel { row: usize, col: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl GridError {
    pub fn code(&self) -> &'static str {
        match self {
            GridError::Overlap { .. } => "OverlapError",
            GridError::OrphanHeading { .. } => "OrphanHeading",
            GridError::Shape(_) => "ShapeError",
            GridError::EmptyLabel { .. } => "EmptyLabel",
            GridError::Model(_) => "InvalidModel",
        }
    }
}

/// Locale-independent number recognition: `.` decimals, optional exponent,
/// no thousands separators, no `inf`/`nan` spellings.
pub fn parse_value(text: &str) -> Value {
    let t = text.trim();
    if t.is_empty() {
        return Value::Missing;
    }
    let numeric_chars = t
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'));
    if numeric_chars && t.chars().any(|c| c.is_ascii_digit()) {
        if let Ok(x) = t.parse::<f64>() {
            if x.is_finite() {
                return Value::Number(x);
            }
        }
    }
    Value::Text(t.to_string())
}

pub(crate) fn heading_label(text: &str) -> Label {
    let t = text.trim();
    if t == Stat::Sum.symbol() {
        Label::derived(Stat::Sum)
    } else {
        Label::plain(t)
    }
}

/// Region a heading cell lives in, with the "level" direction as `major`.
struct HeadingCell<'a> {
    cell: &'a GridCell,
    /// Range along the level direction (rows for column headings).
    major: std::ops::Range<usize>,
    /// Range along the leaf direction (columns for column headings).
    minor: std::ops::Range<usize>,
}

fn build_heading(cells: Vec<HeadingCell<'_>>) -> Result<Vec<HeadingNode>, GridError> {
    // children[i] = indices of cells whose parent is cell i
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    let mut roots = Vec::new();
    for (i, h) in cells.iter().enumerate() {
        if h.cell.text.trim().is_empty() {
            return Err(GridError::EmptyLabel {
                row: h.cell.row,
                col: h.cell.col,
            });
        }
        if h.major.start == 0 {
            roots.push(i);
            continue;
        }
        let orphan = || GridError::OrphanHeading {
            row: h.cell.row,
            col: h.cell.col,
            text: h.cell.text.clone(),
        };
        let parent = cells
            .iter()
            .position(|c| c.major.end == h.major.start && c.minor.contains(&h.minor.start))
            .ok_or_else(orphan)?;
        if h.minor.end > cells[parent].minor.end {
            return Err(orphan());
        }
        children[parent].push(i);
    }
    for list in &mut children {
        list.sort_by_key(|&i| cells[i].minor.start);
    }
    roots.sort_by_key(|&i| cells[i].minor.start);

    fn make(i: usize, cells: &[HeadingCell<'_>], children: &[Vec<usize>]) -> HeadingNode {
        let label = heading_label(&cells[i].cell.text);
        let kids: Vec<HeadingNode> = children[i]
            .iter()
            .map(|&c| make(c, cells, children))
            .collect();
        // A span over several levels becomes a chain of identically named nodes.
        let mut node = HeadingNode::new(label.clone(), kids);
        for _ in 1..cells[i].major.len() {
            node = HeadingNode::new(label.clone(), vec![node]);
        }
        node
    }
    Ok(roots.iter().map(|&r| make(r, &cells, &children)).collect())
}

fn synthesized_axis(prefix: &str, n: usize, kind: Axis) -> Result<HeadingAxis, GridError> {
    let roots = (1..=n)
        .map(|i| HeadingNode::leaf(Label::plain(format!("{prefix}{i}"))))
        .collect();
    Ok(HeadingAxis::with_default_names(roots, kind)?)
}

fn level_names(given: &Option<Vec<String>>, kind: Axis, depth: usize) -> Vec<String> {
    match given {
        Some(names) if names.len() == depth => names.clone(),
        _ => kind.default_level_names(depth),
    }
}

pub fn parse_grid(doc: &GridDoc) -> Result<TableModel, GridError> {
    let (h, w) = (doc.height, doc.width);
    let (hr, hc) = (doc.n_heading_rows, doc.n_heading_cols);
    if hr >= h || hc >= w {
        return Err(GridError::Shape(format!(
            "{hr} heading rows / {hc} heading columns leave no body in a {h}x{w} grid"
        )));
    }

    let mut occ: Vec<Option<usize>> = vec![None; h * w];
    for (i, cell) in doc.cells.iter().enumerate() {
        if cell.row_span == 0 || cell.col_span == 0 || cell.row_end() > h || cell.col_end() > w {
            return Err(GridError::Shape(format!(
                "cell at ({}, {}) has an invalid span or lies outside the grid",
                cell.row, cell.col
            )));
        }
        for r in cell.row..cell.row_end() {
            for c in cell.col..cell.col_end() {
                if occ[r * w + c].replace(i).is_some() {
                    return Err(GridError::Overlap { row: r, col: c });
                }
            }
        }
        let in_heading_rows = cell.row < hr;
        let in_heading_cols = cell.col < hc;
        if (in_heading_rows && cell.row_end() > hr) || (in_heading_cols && cell.col_end() > hc) {
            return Err(GridError::Shape(format!(
                "cell at ({}, {}) crosses the heading/body boundary",
                cell.row, cell.col
            )));
        }
        if !in_heading_rows && !in_heading_cols && (cell.row_span != 1 || cell.col_span != 1) {
            return Err(GridError::Shape(format!(
                "body cell at ({}, {}) is merged",
                cell.row, cell.col
            )));
        }
    }
    if let Some(gap) = occ.iter().position(Option::is_none) {
        return Err(GridError::Shape(format!(
            "position ({}, {}) is not covered by any cell",
            gap / w,
            gap % w
        )));
    }
    let at = |r: usize, c: usize| occ[r * w + c];

    let body_rows = h - hr;
    let body_cols = w - hc;

    let col_axis = if hr == 0 {
        synthesized_axis("c", body_cols, Axis::Col)?
    } else {
        let cells = doc
            .cells
            .iter()
            .filter(|c| c.row < hr && c.col >= hc)
            .map(|c| HeadingCell {
                cell: c,
                major: c.row..c.row_end(),
                minor: c.col - hc..c.col_end() - hc,
            })
            .collect();
        let roots = build_heading(cells)?;
        HeadingAxis::new(roots, level_names(&doc.col_level_names, Axis::Col, hr))?
    };
    let row_axis = if hc == 0 {
        synthesized_axis("r", body_rows, Axis::Row)?
    } else {
        let cells = doc
            .cells
            .iter()
            .filter(|c| c.col < hc && c.row >= hr)
            .map(|c| HeadingCell {
                cell: c,
                major: c.col..c.col_end(),
                minor: c.row - hr..c.row_end() - hr,
            })
            .collect();
        let roots = build_heading(cells)?;
        HeadingAxis::new(roots, level_names(&doc.row_level_names, Axis::Row, hc))?
    };

    let entries = Matrix::from_fn(body_rows, body_cols, |r, c| {
        let i = at(r + hr, c + hc).expect("grid fully covered");
        parse_value(&doc.cells[i].text)
    });
    Ok(TableModel::new(row_axis, col_axis, entries)?)
}

/// A merged region in a CSV-backed grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub row: usize,
    pub col: usize,
    pub row_span: usize,
    pub col_span: usize,
}

/// Builds a [`GridDoc`] from CSV text plus a list of merged regions. The text of a
/// merge is taken from its top-left cell; the other covered cells must be empty.
pub fn grid_from_csv(
    csv_text: &str,
    merges: &[Merge],
    n_heading_rows: usize,
    n_heading_cols: usize,
) -> Result<GridDoc, GridError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_text.as_bytes());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| GridError::Shape(format!("csv: {e}")))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    let height = rows.len();
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let text_at = |r: usize, c: usize| rows.get(r).and_then(|row| row.get(c)).cloned().unwrap_or_default();

    let mut covered = vec![false; height * width];
    let mut cells = Vec::new();
    for m in merges {
        if m.row_span == 0 || m.col_span == 0 || m.row + m.row_span > height || m.col + m.col_span > width {
            return Err(GridError::Shape(format!(
                "merge at ({}, {}) lies outside the {height}x{width} csv grid",
                m.row, m.col
            )));
        }
        for r in m.row..m.row + m.row_span {
            for c in m.col..m.col + m.col_span {
                if std::mem::replace(&mut covered[r * width + c], true) {
                    return Err(GridError::Overlap { row: r, col: c });
                }
                if (r, c) != (m.row, m.col) && !text_at(r, c).trim().is_empty() {
                    return Err(GridError::Shape(format!(
                        "merge at ({}, {}) covers non-empty cell ({r}, {c})",
                        m.row, m.col
                    )));
                }
            }
        }
        cells.push(GridCell::new(m.row, m.col, text_at(m.row, m.col)).spanning(m.row_span, m.col_span));
    }
    for r in 0..height {
        for c in 0..width {
            if !covered[r * width + c] {
                cells.push(GridCell::new(r, c, text_at(r, c)));
            }
        }
    }
    cells.sort_by_key(|c| (c.row, c.col));
    Ok(GridDoc {
        n_heading_rows,
        n_heading_cols,
        width,
        height,
        cells,
        row_level_names: None,
        col_level_names: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;
    use crate::importer::fixture_grid;

    #[test]
    fn fixture_grid_parses_to_fixture_model() {
        let m = parse_grid(&fixture_grid()).unwrap();
        assert_eq!(m, fixture::regional_sales());
    }

    #[test]
    fn flat_grid_synthesizes_row_labels() {
        let doc = GridDoc {
            n_heading_rows: 1,
            n_heading_cols: 0,
            width: 2,
            height: 3,
            cells: vec![
                GridCell::new(0, 0, "a"),
                GridCell::new(0, 1, "b"),
                GridCell::new(1, 0, "1"),
                GridCell::new(1, 1, "2.5"),
                GridCell::new(2, 0, ""),
                GridCell::new(2, 1, "x"),
            ],
            row_level_names: None,
            col_level_names: None,
        };
        let m = parse_grid(&doc).unwrap();
        let rows: Vec<&str> = m.row_axis().roots().iter().map(|n| n.name()).collect();
        assert_eq!(rows, ["r1", "r2"]);
        assert_eq!(m.entry(0, 1), &Value::Number(2.5));
        assert_eq!(m.entry(1, 0), &Value::Missing);
        assert_eq!(m.entry(1, 1), &Value::Text("x".into()));
        assert_eq!(m.row_axis().level_names(), ["row-level-1"]);
    }

    #[test]
    fn straddling_heading_is_an_orphan() {
        // Two parents "A" (cols 0-1) and "B" (cols 2-3); child "x" spans cols 1-2.
        let doc = GridDoc {
            n_heading_rows: 2,
            n_heading_cols: 0,
            width: 4,
            height: 3,
            cells: vec![
                GridCell::new(0, 0, "A").spanning(1, 2),
                GridCell::new(0, 2, "B").spanning(1, 2),
                GridCell::new(1, 0, "w"),
                GridCell::new(1, 1, "x").spanning(1, 2),
                GridCell::new(1, 3, "y"),
                GridCell::new(2, 0, "1"),
                GridCell::new(2, 1, "2"),
                GridCell::new(2, 2, "3"),
                GridCell::new(2, 3, "4"),
            ],
            row_level_names: None,
            col_level_names: None,
        };
        let err = parse_grid(&doc).unwrap_err();
        assert_eq!(err.code(), "OrphanHeading");
    }

    #[test]
    fn overlapping_spans_are_rejected() {
        let mut doc = fixture_grid();
        doc.cells.push(GridCell::new(0, 3, "dup"));
        assert_eq!(parse_grid(&doc).unwrap_err().code(), "OverlapError");
    }

    #[test]
    fn gaps_and_merged_body_cells_are_shape_errors() {
        let mut doc = fixture_grid();
        doc.cells.pop();
        assert_eq!(parse_grid(&doc).unwrap_err().code(), "ShapeError");

        let doc = GridDoc {
            n_heading_rows: 1,
            n_heading_cols: 0,
            width: 2,
            height: 2,
            cells: vec![
                GridCell::new(0, 0, "a"),
                GridCell::new(0, 1, "b"),
                GridCell::new(1, 0, "1").spanning(1, 2),
            ],
            row_level_names: None,
            col_level_names: None,
        };
        assert_eq!(parse_grid(&doc).unwrap_err().code(), "ShapeError");
    }

    #[test]
    fn vertical_heading_span_becomes_a_chain() {
        let doc = GridDoc {
            n_heading_rows: 2,
            n_heading_cols: 0,
            width: 3,
            height: 3,
            cells: vec![
                GridCell::new(0, 0, "key").spanning(2, 1),
                GridCell::new(0, 1, "v").spanning(1, 2),
                GridCell::new(1, 1, "a"),
                GridCell::new(1, 2, "b"),
                GridCell::new(2, 0, "k"),
                GridCell::new(2, 1, "1"),
                GridCell::new(2, 2, "2"),
            ],
            row_level_names: None,
            col_level_names: None,
        };
        let m = parse_grid(&doc).unwrap();
        let seqs: Vec<String> = crate::locator::leaf_sequences(m.col_axis())
            .iter()
            .map(ToString::to_string)
            .collect();
        assert_eq!(seqs, ["(key, key)", "(v, a)", "(v, b)"]);
    }

    #[test]
    fn number_recognition() {
        assert_eq!(parse_value(" 12 "), Value::Number(12.0));
        assert_eq!(parse_value("-1.5e2"), Value::Number(-150.0));
        assert_eq!(parse_value("1,234"), Value::Text("1,234".into()));
        assert_eq!(parse_value("inf"), Value::Text("inf".into()));
        assert_eq!(parse_value("NaN"), Value::Text("NaN".into()));
        assert_eq!(parse_value("-"), Value::Text("-".into()));
        assert_eq!(parse_value(""), Value::Missing);
    }

    #[test]
    fn csv_adapter_round_trips_the_fixture() {
        let csv = "\
,,,2020,,,2021,,
,,,&,spr,aut,&,spr,aut
Asia,CHN,PEK,189,102,87,205,110,95
,,SHA,250,131,119,262,140,122
,JPN,OSA,140,76,64,151,81,70
,,TKY,215,118,97,234,125,109
Europe,FRA,PAR,178,93,85,189,99,90
,,MRS,103,54,49,109,58,51
,GBR,LON,180,88,92,192,95,97
,,LIV,86,45,41,91,47,44
";
        let merges = [
            Merge { row: 0, col: 0, row_span: 2, col_span: 3 },
            Merge { row: 0, col: 3, row_span: 1, col_span: 3 },
            Merge { row: 0, col: 6, row_span: 1, col_span: 3 },
            Merge { row: 2, col: 0, row_span: 4, col_span: 1 },
            Merge { row: 6, col: 0, row_span: 4, col_span: 1 },
            Merge { row: 2, col: 1, row_span: 2, col_span: 1 },
            Merge { row: 4, col: 1, row_span: 2, col_span: 1 },
            Merge { row: 6, col: 1, row_span: 2, col_span: 1 },
            Merge { row: 8, col: 1, row_span: 2, col_span: 1 },
        ];
        let mut doc = grid_from_csv(csv, &merges, 2, 3).unwrap();
        doc.row_level_names = Some(vec!["continent".into(), "country".into(), "city".into()]);
        doc.col_level_names = Some(vec!["year".into(), "season".into()]);
        assert_eq!(parse_grid(&doc).unwrap(), fixture::regional_sales());
    }
}
