//! A small synthetic sales table used by tests, docs and the CLI demo.
//!
//! Rows are continent / country / city; columns are year / season, where the
//! first season of every year is the `&` total of the other two.

use crate::model::{Axis, HeadingAxis, HeadingNode, Label, Matrix, Stat, TableModel, Value};

/// (continent, country, city, [spr, aut] for 2020, [spr, aut] for 2021)
const ROWS: [(&str, &str, &str, [f64; 2], [f64; 2]); 8] = [
    ("Asia", "CHN", "PEK", [102.0, 87.0], [110.0, 95.0]),
    ("Asia", "CHN", "SHA", [131.0, 119.0], [140.0, 122.0]),
    ("Asia", "JPN", "OSA", [76.0, 64.0], [81.0, 70.0]),
    ("Asia", "JPN", "TKY", [118.0, 97.0], [125.0, 109.0]),
    ("Europe", "FRA", "PAR", [93.0, 85.0], [99.0, 90.0]),
    ("Europe", "FRA", "MRS", [54.0, 49.0], [58.0, 51.0]),
    ("Europe", "GBR", "LON", [88.0, 92.0], [95.0, 97.0]),
    ("Europe", "GBR", "LIV", [45.0, 41.0], [47.0, 44.0]),
];

fn node(name: &str, children: Vec<HeadingNode>) -> HeadingNode {
    HeadingNode::new(Label::plain(name), children)
}

fn leaf(name: &str) -> HeadingNode {
    HeadingNode::leaf(Label::plain(name))
}

fn row_axis() -> HeadingAxis {
    let roots = vec![
        node(
            "Asia",
            vec![
                node("CHN", vec![leaf("PEK"), leaf("SHA")]),
                node("JPN", vec![leaf("OSA"), leaf("TKY")]),
            ],
        ),
        node(
            "Europe",
            vec![
                node("FRA", vec![leaf("PAR"), leaf("MRS")]),
                node("GBR", vec![leaf("LON"), leaf("LIV")]),
            ],
        ),
    ];
    HeadingAxis::new(
        roots,
        vec!["continent".into(), "country".into(), "city".into()],
    )
    .expect("static fixture")
}

fn col_axis(with_totals: bool) -> HeadingAxis {
    let seasons = || {
        let mut v = Vec::new();
        if with_totals {
            v.push(HeadingNode::leaf(Label::derived(Stat::Sum)));
        }
        v.push(leaf("spr"));
        v.push(leaf("aut"));
        v
    };
    HeadingAxis::new(
        vec![node("2020", seasons()), node("2021", seasons())],
        vec!["year".into(), "season".into()],
    )
    .expect("static fixture")
}

/// The 8x6 table with `&` totals per year.
pub fn regional_sales() -> TableModel {
    let rows = ROWS
        .iter()
        .map(|(_, _, _, y20, y21)| {
            let mut r = Vec::with_capacity(6);
            for y in [y20, y21] {
                r.push(Value::Number(y[0] + y[1]));
                r.push(Value::Number(y[0]));
                r.push(Value::Number(y[1]));
            }
            r
        })
        .collect();
    TableModel::new(row_axis(), col_axis(true), Matrix::from_rows(rows).unwrap())
        .expect("static fixture")
}

/// The same table without the `&` columns (8x4).
pub fn regional_sales_stacked() -> TableModel {
    let rows = ROWS
        .iter()
        .map(|(_, _, _, y20, y21)| {
            vec![
                Value::Number(y20[0]),
                Value::Number(y20[1]),
                Value::Number(y21[0]),
                Value::Number(y21[1]),
            ]
        })
        .collect();
    TableModel::new(row_axis(), col_axis(false), Matrix::from_rows(rows).unwrap())
        .expect("static fixture")
}

/// A flat table with one level per axis, handy for edge cases.
pub fn flat(rows: &[&str], cols: &[&str], values: Vec<Vec<f64>>) -> TableModel {
    let r = HeadingAxis::with_default_names(rows.iter().map(|n| leaf(n)).collect(), Axis::Row)
        .expect("row labels");
    let c = HeadingAxis::with_default_names(cols.iter().map(|n| leaf(n)).collect(), Axis::Col)
        .expect("column labels");
    let m = Matrix::from_rows(
        values
            .into_iter()
            .map(|r| r.into_iter().map(Value::number).collect())
            .collect(),
    )
    .expect("rectangular values");
    TableModel::new(r, c, m).expect("flat table")
}
