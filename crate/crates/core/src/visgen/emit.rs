//! Vega-Lite document emission.

use serde_json::{json, Map, Value as Json};

use crate::locator::TableUnit;
use crate::model::{Axis, TableModel, Value};

use super::{
    decompose, find_template, normalize, summary_stats, validate_mapping, value_domain, CellSize, Category,
    Decomposition, Geometry, Role, VisConfig, VisError, VisGrammarDoc, VisTemplate,
};

pub const VEGA_LITE_SCHEMA: &str = "https://vega.github.io/schema/vega-lite/v5.json";
const PATH_SEP: &str = " / ";

/// Emits the document for one unit.
pub fn emit_spec(
    model: &TableModel,
    unit: &TableUnit,
    config: &VisConfig,
    cell: CellSize,
) -> Result<VisGrammarDoc, VisError> {
    emit_with(model, unit, config, cell, None)
}

/// Emits one document per unit with the same configuration. Unit templates share a
/// single normalization domain computed over all units first.
pub fn rebind_all(
    model: &TableModel,
    config: &VisConfig,
    units: &[TableUnit],
    cell: CellSize,
) -> Result<Vec<VisGrammarDoc>, VisError> {
    let template = template_for(config)?;
    let domain = if template.category == Category::Unit {
        let values: Vec<&Value> = units
            .iter()
            .flat_map(|u| {
                let b = u.block;
                b.rows()
                    .flat_map(move |r| b.cols().map(move |c| model.entry(r, c)))
            })
            .collect();
        match value_domain(values) {
            Ok(d) => Some(d),
            Err(VisError::EmptyInput) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    units
        .iter()
        .map(|u| emit_with(model, u, config, cell, domain))
        .collect()
}

fn template_for(config: &VisConfig) -> Result<VisTemplate, VisError> {
    find_template(&config.template_id).ok_or_else(|| VisError::UnknownTemplate(config.template_id.clone()))
}

fn check_shape(template: &VisTemplate, config: &VisConfig, d: &Decomposition) -> Result<(), VisError> {
    let (h, w) = (d.y_nominal.len(), d.x_nominal.len());
    match template.category {
        Category::Unit if h * w != 1 => Err(VisError::ShapeError(format!(
            "{} needs a single cell, got {h}x{w}",
            template.id
        ))),
        Category::Trend => {
            let along_cols = config.bindings.get("x") == Some(&Role::XNominal);
            if along_cols && h != 1 {
                Err(VisError::ShapeError(format!("{} across columns needs one row, got {h}", template.id)))
            } else if !along_cols && w != 1 {
                Err(VisError::ShapeError(format!("{} across rows needs one column, got {w}", template.id)))
            } else {
                Ok(())
            }
        }
        Category::Correlation if template.id == "heatmap" && (h < 2 || w < 2) => Err(VisError::ShapeError(
            format!("heatmap needs at least 2x2 cells, got {h}x{w}"),
        )),
        _ => Ok(()),
    }
}

struct Ctx<'a> {
    d: &'a Decomposition,
    config: &'a VisConfig,
    x_unique: bool,
    y_unique: bool,
    x_title: String,
    y_title: String,
    row_title: String,
    col_title: String,
}

fn unique(labels: &[String]) -> bool {
    let mut seen = std::collections::HashSet::new();
    labels.iter().all(|l| seen.insert(l))
}

fn join(path: &[String]) -> String {
    path.join(PATH_SEP)
}

impl<'a> Ctx<'a> {
    fn new(model: &TableModel, d: &'a Decomposition, config: &'a VisConfig) -> Self {
        let last = |a: Axis| model.axis(a).level_names().last().cloned().unwrap_or_default();
        Ctx {
            d,
            config,
            x_unique: unique(&d.x_nominal),
            y_unique: unique(&d.y_nominal),
            x_title: last(Axis::Col),
            y_title: last(Axis::Row),
            row_title: model.row_axis().level_names().join(PATH_SEP),
            col_title: model.col_axis().level_names().join(PATH_SEP),
        }
    }

    fn field(&self, role: Role) -> &'static str {
        match role {
            Role::XNominal if self.x_unique => "x",
            Role::XNominal => "col_path",
            Role::YNominal if self.y_unique => "y",
            Role::YNominal => "row_path",
            Role::Value => "value",
        }
    }

    /// Field value of the i-th column (or row) for a label role.
    fn label(&self, role: Role, i: usize) -> String {
        match (role, self.field(role)) {
            (Role::XNominal, "x") => self.d.x_nominal[i].clone(),
            (Role::XNominal, _) => join(&self.d.col_label_paths[i]),
            (_, "y") => self.d.y_nominal[i].clone(),
            _ => join(&self.d.row_label_paths[i]),
        }
    }

    fn count(&self, role: Role) -> usize {
        match role {
            Role::XNominal => self.d.x_nominal.len(),
            _ => self.d.y_nominal.len(),
        }
    }

    fn nominal(&self, role: Role) -> Json {
        let sort: Vec<String> = (0..self.count(role)).map(|i| self.label(role, i)).collect();
        let title = match role {
            Role::XNominal => &self.x_title,
            _ => &self.y_title,
        };
        json!({"field": self.field(role), "type": "nominal", "sort": sort, "title": title})
    }

    fn quantitative(&self, field: &str, title: &str) -> Json {
        json!({"field": field, "type": "quantitative", "title": title})
    }

    fn with_scheme(&self, mut enc: Json) -> Json {
        if let Some(s) = self.config.option_str("scheme") {
            enc["scale"]["scheme"] = json!(s);
        }
        enc
    }

    fn tooltip(&self) -> Json {
        json!([
            {"field": "row_path", "type": "nominal", "title": self.row_title},
            {"field": "col_path", "type": "nominal", "title": self.col_title},
            {"field": "value", "type": "quantitative", "title": "value"}
        ])
    }

    fn bound(&self, channel: &str) -> Option<Role> {
        self.config.bindings.get(channel).copied()
    }

    /// Per-category summary rows for a label role; categories with no numbers are skipped.
    fn stats(&self, role: Role) -> Vec<Json> {
        let field = self.field(role);
        (0..self.count(role))
            .filter_map(|i| {
                let nums: Vec<f64> = match role {
                    Role::XNominal => (0..self.d.y_nominal.len())
                        .filter_map(|r| self.d.values.get(r, i).as_number())
                        .collect(),
                    _ => self.d.values.row(i).iter().filter_map(Value::as_number).collect(),
                };
                let s = summary_stats(&nums).ok()?;
                Some(json!({
                    field: self.label(role, i),
                    "min": s.min, "q1": s.q1, "median": s.median, "q3": s.q3, "max": s.max,
                    "mean": s.mean, "n": s.n
                }))
            })
            .collect()
    }
}

fn data_rows(d: &Decomposition, norm: Option<(f64, f64)>) -> Vec<Json> {
    let mut rows = Vec::with_capacity(d.values.rows() * d.values.cols());
    for (r, row) in d.values.iter_rows().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let mut o = Map::new();
            o.insert("x".into(), json!(d.x_nominal[c]));
            o.insert("y".into(), json!(d.y_nominal[r]));
            o.insert("value".into(), json!(v.as_number()));
            o.insert("row_path".into(), json!(join(&d.row_label_paths[r])));
            o.insert("col_path".into(), json!(join(&d.col_label_paths[c])));
            o.insert("row_index".into(), json!(r));
            o.insert("col_index".into(), json!(c));
            if let Some((lo, hi)) = norm {
                o.insert("norm".into(), json!(v.as_number().map(|x| normalize(x, lo, hi))));
            }
            rows.push(Json::Object(o));
        }
    }
    rows
}

fn emit_with(
    model: &TableModel,
    unit: &TableUnit,
    config: &VisConfig,
    cell: CellSize,
    shared_domain: Option<(f64, f64)>,
) -> Result<VisGrammarDoc, VisError> {
    let template = template_for(config)?;
    let d = decompose(model, unit);
    validate_mapping(&template, config, &d)?;
    check_shape(&template, config, &d)?;
    if let Some(t) = d.values.iter().find_map(|v| match v {
        Value::Text(t) => Some(t),
        _ => None,
    }) {
        return Err(VisError::NonNumeric(t.clone()));
    }
    if matches!(template.id.as_str(), "pie" | "radial") {
        if let Some(x) = d.values.iter().filter_map(Value::as_number).find(|x| *x < 0.0) {
            return Err(VisError::NegativeValue(x.to_string()));
        }
    }

    let b = unit.block;
    let geometry = Geometry {
        x: b.col_start as f64 * cell.width,
        y: b.row_start as f64 * cell.height,
        width: b.width() as f64 * cell.width,
        height: b.height() as f64 * cell.height,
    };
    let domain = if template.category == Category::Unit {
        Some(shared_domain.unwrap_or_else(|| {
            value_domain(d.values.iter()).unwrap_or((0.0, 0.0))
        }))
    } else {
        None
    };
    let ctx = Ctx::new(model, &d, config);
    let mut doc = Map::new();
    doc.insert("$schema".into(), json!(VEGA_LITE_SCHEMA));
    doc.insert("width".into(), json!(geometry.width));
    doc.insert("height".into(), json!(geometry.height));
    doc.insert("autosize".into(), json!({"type": "fit", "contains": "padding"}));
    doc.insert("data".into(), json!({"values": data_rows(&d, domain)}));
    let body = match template.id.as_str() {
        "unit_color" | "unit_size" | "unit_bar" => unit_body(&ctx, &template.id, geometry),
        "stacked_bar" => json!({
            "mark": "bar",
            "encoding": {
                "x": ctx.nominal(Role::XNominal),
                "y": ctx.quantitative("value", "value"),
                "color": ctx.with_scheme(ctx.nominal(Role::YNominal)),
                "tooltip": ctx.tooltip()
            }
        }),
        "parallel_coordinates" => {
            let x = ctx.field(Role::XNominal);
            let mut enc = json!({
                "x": ctx.nominal(Role::XNominal),
                "y": {"field": "norm", "type": "quantitative", "title": "value (normalized per axis)",
                      "scale": {"domain": [0, 1]}},
                "detail": {"field": ctx.field(Role::YNominal), "type": "nominal"},
                "tooltip": ctx.tooltip()
            });
            if ctx.bound("color").is_some() {
                enc["color"] = ctx.with_scheme(ctx.nominal(Role::YNominal));
            }
            json!({
                "transform": [
                    {"joinaggregate": [
                        {"op": "min", "field": "value", "as": "axis_min"},
                        {"op": "max", "field": "value", "as": "axis_max"}
                    ], "groupby": [x]},
                    {"calculate": "datum.value == null ? null : (datum.axis_max > datum.axis_min ? (datum.value - datum.axis_min) / (datum.axis_max - datum.axis_min) : 0.5)", "as": "norm"}
                ],
                "mark": "line",
                "encoding": enc
            })
        }
        "multi_line" => json!({
            "mark": {"type": "line", "point": true},
            "encoding": {
                "x": ctx.nominal(Role::XNominal),
                "y": ctx.quantitative("value", "value"),
                "color": ctx.with_scheme(ctx.nominal(Role::YNominal)),
                "tooltip": ctx.tooltip()
            }
        }),
        "pie" | "radial" => {
            let role = ctx.bound("color").expect("validated");
            let mut stats = ctx.stats(role);
            let enc = if template.id == "pie" {
                json!({
                    "theta": ctx.quantitative("mean", "mean value"),
                    "color": ctx.with_scheme(ctx.nominal(role)),
                    "tooltip": [{"field": ctx.field(role), "type": "nominal"}, ctx.quantitative("mean", "mean value")]
                })
            } else {
                for s in &mut stats {
                    s["slot"] = json!(1);
                }
                json!({
                    "theta": {"field": "slot", "type": "quantitative", "stack": true},
                    "radius": {"field": "mean", "type": "quantitative", "title": "mean value",
                               "scale": {"type": "sqrt", "zero": true}},
                    "color": ctx.with_scheme(ctx.nominal(role)),
                    "tooltip": [{"field": ctx.field(role), "type": "nominal"}, ctx.quantitative("mean", "mean value")]
                })
            };
            json!({"layer": [{"data": {"values": stats}, "mark": "arc", "encoding": enc}]})
        }
        "heatmap" => json!({
            "mark": "rect",
            "encoding": {
                "x": ctx.nominal(Role::XNominal),
                "y": ctx.nominal(Role::YNominal),
                "color": ctx.with_scheme(ctx.quantitative("value", "value")),
                "tooltip": ctx.tooltip()
            }
        }),
        "scatter" => scatter_body(&ctx, geometry, &mut doc)?,
        _ => paired_body(&ctx, &template.id),
    };
    let Json::Object(body) = body else {
        unreachable!("bodies are objects")
    };
    doc.extend(body);
    let mut meta = json!({
        "geometry": geometry,
        "template": template.id,
        "bindings": config.bindings,
        "unit": unit,
    });
    if !config.options.is_empty() {
        meta["options"] = json!(config.options);
    }
    if let Some((lo, hi)) = domain {
        meta["domain"] = json!([lo, hi]);
    }
    doc.insert("usermeta".into(), json!({ "_hitailor": meta }));
    Ok(VisGrammarDoc {
        doc: Json::Object(doc),
        geometry,
        unit: unit.clone(),
    })
}

fn unit_body(ctx: &Ctx<'_>, id: &str, g: Geometry) -> Json {
    let norm = |extra: Json| {
        let mut e = json!({"field": "norm", "type": "quantitative", "title": "value",
                           "scale": {"domain": [0, 1]}});
        if let Json::Object(m) = extra {
            for (k, v) in m {
                e["scale"][k] = v;
            }
        }
        e
    };
    match id {
        "unit_color" => json!({
            "mark": "rect",
            "encoding": {"color": ctx.with_scheme(norm(json!({}))), "tooltip": ctx.tooltip()}
        }),
        "unit_size" => {
            let side = g.width.min(g.height);
            json!({
                "mark": "circle",
                "encoding": {"size": norm(json!({"range": [0.0, side * side]})), "tooltip": ctx.tooltip()}
            })
        }
        _ => json!({
            "mark": "bar",
            "encoding": {
                "x": {"field": "norm", "type": "quantitative", "scale": {"domain": [0, 1]}, "axis": null},
                "tooltip": ctx.tooltip()
            }
        }),
    }
}

fn paired_body(ctx: &Ctx<'_>, id: &str) -> Json {
    let x = ctx.bound("x").expect("validated");
    let (nom_ch, val_ch, role) = if x == Role::Value {
        ("y", "x", ctx.bound("y").expect("validated"))
    } else {
        ("x", "y", x)
    };
    let val2 = format!("{val_ch}2");
    let nominal = ctx.nominal(role);
    let stats = || json!({"values": ctx.stats(role)});
    let q = |f: &str| ctx.quantitative(f, "value");
    let layer = |mark: Json, pairs: Vec<(&str, Json)>| {
        let mut enc = Map::new();
        enc.insert(nom_ch.to_string(), nominal.clone());
        for (k, v) in pairs {
            enc.insert(k.to_string(), v);
        }
        json!({"mark": mark, "encoding": enc})
    };
    let with_data = |mut l: Json| {
        l["data"] = stats();
        l
    };
    match id {
        "bar" => json!({"layer": [with_data(layer(json!("bar"), vec![
            (val_ch, ctx.quantitative("mean", "mean value")),
            ("tooltip", json!([{"field": ctx.field(role), "type": "nominal"}, ctx.quantitative("mean", "mean value"), ctx.quantitative("n", "n")]))
        ]))]}),
        "ranged_dot" => json!({"layer": [
            with_data(layer(json!("rule"), vec![(val_ch, q("min")), (&val2, json!({"field": "max"}))])),
            with_data(layer(json!({"type": "point", "filled": true}), vec![(val_ch, q("min"))])),
            with_data(layer(json!({"type": "point", "filled": true}), vec![(val_ch, q("max"))])),
        ]}),
        "box_plot" => json!({"layer": [
            with_data(layer(json!("rule"), vec![(val_ch, q("min")), (&val2, json!({"field": "max"}))])),
            with_data(layer(json!({"type": "bar", "size": 12}), vec![(val_ch, q("q1")), (&val2, json!({"field": "q3"}))])),
            with_data(layer(json!({"type": "tick", "color": "white", "size": 12}), vec![(val_ch, q("median"))])),
        ]}),
        "strip_plot" => layer(json!("tick"), vec![(val_ch, q("value")), ("tooltip", ctx.tooltip())]),
        "line" => layer(json!({"type": "line", "point": true}), vec![(val_ch, q("value")), ("tooltip", ctx.tooltip())]),
        _ => {
            let nums: Vec<f64> = ctx.d.values.iter().filter_map(Value::as_number).collect();
            let (lo, hi) = nums
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let (lo, hi) = if nums.is_empty() { (0.0, 0.0) } else { (lo, hi) };
            let mid = (lo + hi) / 2.0;
            let span = if mid > lo { mid - lo } else { 1.0 };
            let orient = if nom_ch == "x" { "vertical" } else { "horizontal" };
            let band = |field: &str, opacity: f64| {
                layer(
                    json!({"type": "area", "orient": orient, "opacity": opacity}),
                    vec![
                        (val_ch, json!({"field": field, "type": "quantitative", "title": "value",
                                        "scale": {"domain": [0.0, span]}, "axis": null})),
                        ("tooltip", ctx.tooltip()),
                    ],
                )
            };
            json!({
                "transform": [
                    {"calculate": format!("datum.value == null ? null : min(datum.value, {mid}) - {lo}"), "as": "band1"},
                    {"calculate": format!("datum.value == null ? null : max(datum.value - {mid}, 0)"), "as": "band2"}
                ],
                "layer": [band("band1", 0.5), band("band2", 1.0)]
            })
        }
    }
}

fn scatter_body(ctx: &Ctx<'_>, g: Geometry, doc: &mut Map<String, Json>) -> Result<Json, VisError> {
    let by_rows = match ctx.config.option_str("series") {
        None | Some("cols") | Some("columns") => false,
        Some("rows") => true,
        Some(other) => {
            return Err(VisError::ShapeError(format!(
                "unknown series option {other:?}, expected rows or cols"
            )))
        }
    };
    let (series_role, item_role) = if by_rows {
        (Role::YNominal, Role::XNominal)
    } else {
        (Role::XNominal, Role::YNominal)
    };
    let (n_series, n_items) = (ctx.count(series_role), ctx.count(item_role));
    if n_series < 2 || n_items < 2 {
        return Err(VisError::ShapeError(format!(
            "scatter needs at least 2 series and 2 items, got {n_series} and {n_items}"
        )));
    }
    if let Some(c) = ctx.bound("color") {
        if c != item_role {
            return Err(VisError::ShapeError("scatter color must encode the items".to_string()));
        }
    }
    let (pivot, groupby, item_path) = if by_rows {
        ("row_index", ["col_index", "x", "col_path"], "col_path")
    } else {
        ("col_index", ["row_index", "y", "row_path"], "row_path")
    };
    let titles: Vec<String> = (0..n_series)
        .map(|i| {
            join(if by_rows {
                &ctx.d.row_label_paths[i]
            } else {
                &ctx.d.col_label_paths[i]
            })
        })
        .collect();
    let mut enc = json!({"tooltip": [{"field": item_path, "type": "nominal"}]});
    if ctx.bound("color").is_some() {
        enc["color"] = ctx.with_scheme(ctx.nominal(item_role));
    }
    let transform = json!([{"pivot": pivot, "value": "value", "groupby": groupby}]);
    if n_series == 2 {
        enc["x"] = json!({"field": "0", "type": "quantitative", "title": titles[0]});
        enc["y"] = json!({"field": "1", "type": "quantitative", "title": titles[1]});
        return Ok(json!({"transform": transform, "mark": "point", "encoding": enc}));
    }
    doc.remove("width");
    doc.remove("height");
    let fields: Vec<String> = (0..n_series).map(|i| i.to_string()).collect();
    enc["x"] = json!({"field": {"repeat": "column"}, "type": "quantitative"});
    enc["y"] = json!({"field": {"repeat": "row"}, "type": "quantitative"});
    let n = n_series as f64;
    Ok(json!({
        "transform": transform,
        "repeat": {"row": fields, "column": fields},
        "spec": {"width": g.width / n, "height": g.height / n, "mark": "point", "encoding": enc}
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::regional_sales;
    use crate::locator::{seq, Block, Locator};

    fn unit(m: &TableModel, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> TableUnit {
        TableUnit::from_block(m, Block::new(rows, cols)).unwrap()
    }

    #[test]
    fn stacked_bar_document() {
        let m = regional_sales();
        let u = TableUnit::from_locators(
            &m,
            &Locator::single(seq(&["Europe", "FRA", "*"])),
            &Locator::single(seq(&["2021", "*"])),
        )
        .unwrap();
        let cfg = VisConfig::new(
            "stacked_bar",
            &[("x", Role::XNominal), ("height", Role::Value), ("color", Role::YNominal)],
        );
        let d = emit_spec(&m, &u, &cfg, CellSize::default()).unwrap();
        assert_eq!(d.doc["$schema"], VEGA_LITE_SCHEMA);
        assert_eq!(d.doc["data"]["values"].as_array().unwrap().len(), 6);
        assert_eq!(d.doc["encoding"]["color"]["field"], "y");
        assert_eq!(d.doc["encoding"]["color"]["title"], "city");
        assert_eq!(d.geometry, Geometry { x: 240.0, y: 96.0, width: 240.0, height: 48.0 });
        assert_eq!(d.doc["usermeta"]["_hitailor"]["geometry"]["width"], 240.0);
        let again = emit_spec(&m, &u, &cfg, CellSize::default()).unwrap();
        assert_eq!(d.to_json_string(), again.to_json_string());
    }

    #[test]
    fn horizon_has_two_bands() {
        let m = regional_sales();
        let cfg = VisConfig::new("horizon", &[("x", Role::XNominal), ("y", Role::Value)]);
        let d = emit_spec(&m, &unit(&m, 1..2, 0..6), &cfg, CellSize::default()).unwrap();
        assert_eq!(d.doc["layer"].as_array().unwrap().len(), 2);
        let err = emit_spec(&m, &unit(&m, 0..2, 0..6), &cfg, CellSize::default()).unwrap_err();
        assert_eq!(err.code(), "ShapeError");
    }

    #[test]
    fn scatter_needs_two_series() {
        let m = regional_sales();
        let cfg = VisConfig::new("scatter", &[("x", Role::Value), ("y", Role::Value)])
            .with_option("series", json!("rows"));
        let err = emit_spec(&m, &unit(&m, 1..2, 0..6), &cfg, CellSize::default()).unwrap_err();
        assert_eq!(err.code(), "ShapeError");
        let ok = emit_spec(&m, &unit(&m, 0..2, 0..6), &cfg, CellSize::default()).unwrap();
        assert_eq!(ok.doc["encoding"]["x"]["field"], "0");
    }

    #[test]
    fn unit_color_shares_the_set_domain() {
        let m = regional_sales();
        let units: Vec<TableUnit> = (0..8)
            .flat_map(|r| (0..6).map(move |c| (r, c)))
            .map(|(r, c)| unit(&m, r..r + 1, c..c + 1))
            .collect();
        let cfg = VisConfig::new("unit_color", &[("color", Role::Value)]);
        let docs = rebind_all(&m, &cfg, &units, CellSize::default()).unwrap();
        assert_eq!(docs.len(), 48);
        let sha = &docs[6 + 1];
        let lo = m.entries().iter().filter_map(Value::as_number).fold(f64::INFINITY, f64::min);
        let hi = m.entries().iter().filter_map(Value::as_number).fold(f64::NEG_INFINITY, f64::max);
        let want = (131.0 - lo) / (hi - lo);
        assert_eq!(sha.doc["data"]["values"][0]["norm"], json!(want));
        assert!(docs.iter().all(|d| d.doc["usermeta"]["_hitailor"]["domain"] == json!([lo, hi])));
        assert_eq!(sha.doc["mark"], "rect");
        assert!(rebind_all(&m, &cfg, &[], CellSize::default()).unwrap().is_empty());
    }

    #[test]
    fn unit_templates_need_one_cell() {
        let m = regional_sales();
        let cfg = VisConfig::new("unit_size", &[("size", Role::Value)]);
        let err = emit_spec(&m, &unit(&m, 0..2, 0..1), &cfg, CellSize::default()).unwrap_err();
        assert_eq!(err.code(), "ShapeError");
    }

    #[test]
    fn box_plot_stats_follow_summary_stats() {
        let m = regional_sales();
        let cfg = VisConfig::new("box_plot", &[("x", Role::XNominal), ("y", Role::Value)]);
        let d = emit_spec(&m, &unit(&m, 0..8, 1..3), &cfg, CellSize::default()).unwrap();
        let stats = &d.doc["layer"][1]["data"]["values"][0];
        let col: Vec<f64> = (0..8).map(|r| m.entry(r, 1).as_number().unwrap()).collect();
        let s = summary_stats(&col).unwrap();
        assert_eq!(stats["x"], "spr");
        assert_eq!(stats["q1"], json!(s.q1));
        assert_eq!(stats["q3"], json!(s.q3));
    }

    #[test]
    fn pie_rejects_negative_values() {
        let m = crate::fixture::flat(&["a", "b"], &["x", "y"], vec![vec![1.0, -2.0], vec![3.0, 4.0]]);
        let cfg = VisConfig::new("pie", &[("theta", Role::Value), ("color", Role::XNominal)]);
        let err = emit_spec(&m, &unit(&m, 0..2, 0..2), &cfg, CellSize::default()).unwrap_err();
        assert_eq!(err.code(), "NegativeValue");
    }
}
