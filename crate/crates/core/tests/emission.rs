use std::collections::BTreeMap;
use std::sync::OnceLock;

use hitailor_core::fixture::regional_sales;
use hitailor_core::locator::{seq, Block, Locator, TableUnit};
use hitailor_core::model::TableModel;
use hitailor_core::recommend::{recommend, Mechanism, PriorityRange};
use hitailor_core::visgen::{
    decompose, emit_spec, rebind_all, template_catalog, validate_mapping, CellSize, Role, VisConfig, VisTemplate,
};
use serde_json::{json, Value as Json};

fn validator() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/schemas/vega-lite-v5.json");
        let mut schema: Json = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        escape_refs(&mut schema);
        jsonschema::validator_for(&schema).unwrap()
    })
}

/// The published schema uses characters such as `<` and `|` in definition names; percent-encode them
/// inside `$ref` so the references are valid URI references.
fn escape_refs(v: &mut Json) {
    match v {
        Json::Object(o) => {
            for (k, child) in o.iter_mut() {
                match child {
                    Json::String(s) if k == "$ref" => {
                        *s = s
                            .chars()
                            .map(|c| match c {
                                'A'..='Z' | 'a'..='z' | '0'..='9' | '#' | '/' | '-' | '_' | '.' | '(' | ')' => c.to_string(),
                                _ => format!("%{:02X}", c as u32),
                            })
                            .collect();
                    }
                    _ => escape_refs(child),
                }
            }
        }
        Json::Array(a) => a.iter_mut().for_each(escape_refs),
        _ => {}
    }
}

fn schema_errors(doc: &Json) -> Vec<String> {
    validator().iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).take(5).collect()
}

const HORIZONTAL: [&str; 3] = ["x", "x2", "xOffset"];
const VERTICAL: [&str; 3] = ["y", "y2", "yOffset"];

/// Field names that carry each label role in emitted data.
fn row_fields() -> [&'static str; 3] {
    ["y", "row_path", "row_index"]
}

fn col_fields() -> [&'static str; 3] {
    ["x", "col_path", "col_index"]
}

/// Every positional encoding in the document, recursively.
fn positional_fields(doc: &Json, out: &mut Vec<(String, String)>) {
    match doc {
        Json::Object(o) => {
            if let Some(Json::Object(enc)) = o.get("encoding") {
                for (ch, def) in enc {
                    if let Some(f) = def.get("field").and_then(Json::as_str) {
                        out.push((ch.clone(), f.to_string()));
                    }
                }
            }
            for v in o.values() {
                positional_fields(v, out);
            }
        }
        Json::Array(a) => a.iter().for_each(|v| positional_fields(v, out)),
        _ => {}
    }
}

fn assert_mapping_restriction(doc: &Json) {
    let mut fields = Vec::new();
    positional_fields(doc, &mut fields);
    for (ch, f) in fields {
        if HORIZONTAL.contains(&ch.as_str()) {
            assert!(!row_fields().contains(&f.as_str()), "row label field {f} on {ch}");
        }
        if VERTICAL.contains(&ch.as_str()) {
            assert!(!col_fields().contains(&f.as_str()), "column label field {f} on {ch}");
        }
    }
}

/// All role assignments a template accepts.
fn valid_configs(t: &VisTemplate, model: &TableModel, unit: &TableUnit) -> Vec<VisConfig> {
    let mut configs = vec![BTreeMap::new()];
    for c in &t.channels {
        let mut next = Vec::new();
        for partial in &configs {
            if !c.required {
                next.push(partial.clone());
            }
            for r in &c.accepted_roles {
                let mut b = partial.clone();
                b.insert(c.channel_name.clone(), *r);
                next.push(b);
            }
        }
        configs = next;
    }
    let d = decompose(model, unit);
    let mut out = Vec::new();
    for bindings in configs {
        let cfg = VisConfig {
            template_id: t.id.clone(),
            bindings,
            options: BTreeMap::new(),
        };
        if validate_mapping(t, &cfg, &d).is_ok() {
            if t.id == "scatter" {
                out.push(cfg.clone().with_option("series", json!("rows")));
            }
            out.push(cfg.with_option("scheme", json!("blues")));
        }
    }
    out
}

fn units(m: &TableModel) -> Vec<TableUnit> {
    [
        Block::cell(1, 1),
        Block::new(1..2, 0..6),
        Block::new(1..2, 3..6),
        Block::new(0..8, 2..3),
        Block::new(4..6, 3..6),
        Block::new(0..4, 0..3),
        Block::new(0..8, 0..6),
    ]
    .into_iter()
    .map(|b| TableUnit::from_block(m, b).unwrap())
    .collect()
}

#[test]
fn every_template_emits_schema_valid_restricted_deterministic_documents() {
    let m = regional_sales();
    let mut emitted: BTreeMap<String, usize> = BTreeMap::new();
    for t in template_catalog() {
        for unit in units(&m) {
            for cfg in valid_configs(&t, &m, &unit) {
                match emit_spec(&m, &unit, &cfg, CellSize::default()) {
                    Ok(doc) => {
                        let errors = schema_errors(&doc.doc);
                        assert!(errors.is_empty(), "{} {:?}: {errors:?}", t.id, cfg.bindings);
                        assert_mapping_restriction(&doc.doc);
                        let again = emit_spec(&m, &unit, &cfg, CellSize::default()).unwrap();
                        assert_eq!(doc.to_json_string(), again.to_json_string());
                        assert_eq!(doc.geometry.width, unit.block.width() as f64 * 80.0);
                        assert_eq!(doc.geometry.height, unit.block.height() as f64 * 24.0);
                        *emitted.entry(t.id.clone()).or_default() += 1;
                    }
                    Err(e) => assert_eq!(e.code(), "ShapeError", "{} {:?}: {e}", t.id, cfg.bindings),
                }
            }
        }
    }
    assert_eq!(emitted.len(), 16, "{emitted:?}");
}

fn stacked_bar() -> VisConfig {
    VisConfig::new(
        "stacked_bar",
        &[("x", Role::XNominal), ("height", Role::Value), ("color", Role::YNominal)],
    )
}

#[test]
fn rebinding_keeps_the_channel_map() {
    let m = regional_sales();
    let reference = TableUnit::from_locators(
        &m,
        &Locator::single(seq(&["Europe", "FRA", "*"])),
        &Locator::single(seq(&["2021", "*"])),
    )
    .unwrap();
    let recs = recommend(&m, &reference, Mechanism::Topology, PriorityRange::full(), PriorityRange::full()).unwrap();
    let units: Vec<TableUnit> = recs.iter().map(|r| r.unit.clone()).collect();
    let docs = rebind_all(&m, &stacked_bar(), &units, CellSize::default()).unwrap();
    assert_eq!(docs.len(), 8);
    let channels = |d: &Json| d["encoding"].as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    for d in &docs {
        assert_eq!(channels(&d.doc), channels(&docs[0].doc));
        assert_eq!(d.doc["usermeta"]["_hitailor"]["bindings"], json!(stacked_bar().bindings));
    }
    let gbr = docs
        .iter()
        .find(|d| d.unit.row_locator == Locator::single(seq(&["Europe", "GBR", "*"])) && d.unit.block.col_start == 3)
        .unwrap();
    let ys: Vec<&str> = gbr.doc["encoding"]["color"]["sort"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(ys, ["LON", "LIV"]);
    assert!(rebind_all(&m, &stacked_bar(), &[], CellSize::default()).unwrap().is_empty());
}

#[test]
fn unit_template_normalizes_over_the_recommendation_set() {
    let m = regional_sales();
    let cell = TableUnit::from_block(&m, Block::cell(1, 1)).unwrap();
    let recs = recommend(&m, &cell, Mechanism::Topology, PriorityRange::new(0, 1), PriorityRange::new(0, 1)).unwrap();
    let units: Vec<TableUnit> = recs.iter().map(|r| r.unit.clone()).collect();
    let values: Vec<f64> = units
        .iter()
        .map(|u| m.entry(u.block.row_start, u.block.col_start).as_number().unwrap())
        .collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cfg = VisConfig::new("unit_color", &[("color", Role::Value)]);
    let docs = rebind_all(&m, &cfg, &units, CellSize::default()).unwrap();
    let norms: Vec<f64> = docs.iter().map(|d| d.doc["data"]["values"][0]["norm"].as_f64().unwrap()).collect();
    for (n, v) in norms.iter().zip(&values) {
        assert!((n - (v - lo) / (hi - lo)).abs() < 1e-12);
    }
    assert_eq!(norms.iter().cloned().fold(f64::INFINITY, f64::min), 0.0);
    assert_eq!(norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
    for d in &docs {
        assert_eq!(d.doc["usermeta"]["_hitailor"]["domain"], json!([lo, hi]));
        assert!(schema_errors(&d.doc).is_empty());
    }
}

#[test]
fn validator_rejects_malformed_documents() {
    assert!(schema_errors(&json!({"mark": "bar", "data": {"values": []}})).is_empty());
    assert!(!schema_errors(&json!({"mark": "barr", "data": {"values": []}})).is_empty());
    assert!(!schema_errors(&json!({"mark": "bar", "encoding": {"x": {"field": "a", "type": "numeric"}}})).is_empty());
}
