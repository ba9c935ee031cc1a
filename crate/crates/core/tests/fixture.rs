use hitailor_core::fixture::regional_sales;
use hitailor_core::importer::{fixture_grid, parse_doc_str, parse_grid, parse_htj_str, to_htj_string};
use hitailor_core::locator::{resolve_locator, seq, AxisIndex, Block, Locator};
use hitailor_core::model::{Axis, HeadingNode, Value};
use hitailor_core::recommend::{descriptor_of, name_priority, topo_priority};
use hitailor_core::structure::detect_structure;
use hitailor_core::transform::{apply, TransformOp};
use hitailor_core::visgen::{normalize_unit_values, summary_stats};
use proptest::prelude::*;

fn golden(name: &str) -> String {
    let path = format!("{}/tests/golden/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

fn names(nodes: &[HeadingNode]) -> Vec<String> {
    nodes.iter().map(|n| n.name().to_string()).collect()
}

/// Nested (label, children) rendering of a forest.
fn render(nodes: &[HeadingNode]) -> String {
    nodes
        .iter()
        .map(|n| {
            if n.children.is_empty() {
                n.name().to_string()
            } else {
                format!("{}({})", n.name(), render(&n.children))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[test]
fn grid_fixture_parses_to_the_worked_model() {
    let start = std::time::Instant::now();
    let m = parse_grid(&fixture_grid()).unwrap();
    assert_eq!(m, regional_sales());
    assert_eq!(
        render(m.row_axis().roots()),
        "Asia(CHN(PEK SHA) JPN(OSA TKY)) Europe(FRA(PAR MRS) GBR(LON LIV))"
    );

    let rows = detect_structure(m.row_axis());
    assert_eq!(rows.bicluster_from, None);
    let cols = detect_structure(m.col_axis());
    assert_eq!(cols.bicluster_from, Some(1));
    assert_eq!(names(m.col_axis().roots()), ["2020", "2021"]);
    for year in m.col_axis().roots() {
        assert_eq!(names(&year.children), ["&", "spr", "aut"]);
    }

    let b = resolve_locator(
        &m,
        &Locator::single(seq(&["Asia", "CHN", "SHA"])),
        &Locator::single(seq(&["2020", "spr"])),
    )
    .unwrap();
    assert_eq!(b, Block::cell(1, 1));
    assert_eq!(m.entry(1, 1), &Value::Number(131.0));
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

/// Lowest common ancestor depth by comparing root paths.
fn lca_distance(a: &[&str], b: &[&str]) -> usize {
    let common = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    a.len() - common
}

#[test]
fn worked_priorities() {
    let m = regional_sales();
    let rows = AxisIndex::new(&m, Axis::Row);
    let d = |idx: &AxisIndex, p: &[&str]| descriptor_of(idx, &Locator::single(seq(p))).unwrap();
    let sha = d(&rows, &["Asia", "CHN", "SHA"]);
    let topo = |p: &[&str]| topo_priority(&rows, &sha, &d(&rows, p)).unwrap();
    assert_eq!(topo(&["Asia", "JPN", "TKY"]), 2);
    for city in [["Asia", "CHN", "PEK"], ["Europe", "FRA", "PAR"], ["Europe", "GBR", "LIV"], ["Asia", "JPN", "OSA"]] {
        assert_eq!(topo(&city), lca_distance(&["Asia", "CHN", "SHA"], &city), "{city:?}");
    }
    assert_eq!(topo(&["Asia", "CHN", "PEK"]), 1);
    assert_eq!(topo(&["Europe", "FRA", "PAR"]), 3);

    let cols = AxisIndex::new(&m, Axis::Col);
    let spr = d(&cols, &["2020", "spr"]);
    let name = |p: &[&str]| name_priority(&cols, &spr, &d(&cols, p)).unwrap();
    assert_eq!(name(&["2021", "spr"]), 1);
    assert_eq!(name(&["2020", "aut"]), 2);
}

#[test]
fn fixture_htj_matches_the_golden_file() {
    let text = to_htj_string(&regional_sales());
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        let path = format!("{}/tests/golden/fixture.htj.json", env!("CARGO_MANIFEST_DIR"));
        std::fs::write(path, &text).unwrap();
    }
    assert_eq!(text, golden("fixture.htj.json"));
    assert_eq!(parse_htj_str(&text).unwrap(), regional_sales());
    assert_eq!(parse_doc_str(&text).unwrap(), regional_sales());
}

#[test]
fn swapping_a_two_by_two_header_matches_the_hand_written_result() {
    let input = parse_htj_str(&golden("swap_2x2.in.json")).unwrap();
    let out = apply(&input, &TransformOp::Swap { axis: Axis::Col, upper_level: 1 }).unwrap();
    let want = parse_htj_str(&golden("swap_2x2.expected.json")).unwrap();
    assert!(out.same_content(&want), "{}", to_htj_string(&out));
    assert_eq!(out.version(), input.version() + 1);
}

/// Hyndman-Fan type 7 quantile with 1-based ranks.
fn type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p + 1.0;
    let k = h.floor() as usize;
    if k >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[k - 1] + (h - k as f64) * (sorted[k] - sorted[k - 1])
}

proptest! {
    #[test]
    fn summary_stats_match_a_sort_oracle(values in prop::collection::vec(-1e6f64..1e6, 1..1000)) {
        let s = summary_stats(&values).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len();
        prop_assert_eq!(s.n, n);
        prop_assert_eq!(s.min, sorted[0]);
        prop_assert_eq!(s.max, sorted[n - 1]);
        let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
        let tol = 1e-6;
        prop_assert!((s.median - median).abs() < tol, "median {} vs {}", s.median, median);
        prop_assert!((s.q1 - type7(&sorted, 0.25)).abs() < tol);
        prop_assert!((s.q3 - type7(&sorted, 0.75)).abs() < tol);
        let mean = sorted.iter().sum::<f64>() / n as f64;
        prop_assert!((s.mean - mean).abs() < tol);
        prop_assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
    }

    #[test]
    fn normalization_spans_the_unit_interval(values in prop::collection::vec(-1e6f64..1e6, 2..200)) {
        let cells: Vec<(usize, Value)> = values.iter().copied().map(Value::Number).enumerate().collect();
        let out = normalize_unit_values(&cells).unwrap();
        let norms: Vec<f64> = out.iter().map(|(_, v)| v.unwrap()).collect();
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if values.iter().any(|v| *v != values[0]) {
            prop_assert_eq!(lo, 0.0);
            prop_assert!((hi - 1.0).abs() < 1e-12);
        } else {
            prop_assert!(norms.iter().all(|v| *v == 0.5));
        }
        for (i, (k, _)) in out.iter().enumerate() {
            prop_assert_eq!(*k, i);
        }
    }
}
