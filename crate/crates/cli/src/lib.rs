//! `hitailor`: batch import, transformation and chart emission for hierarchical tables.
//!
//! Every command talks to the HTTP service. With `--server` it uses a running
//! instance; otherwise it starts one in-process on a loopback port.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hitailor_client::{Client, ClientError};
use hitailor_core::api::{ApiError, ApplyTo, RecommendQuery, Ranges, SessionState, UnitRef, VisualizeRequest};
use hitailor_core::importer::{grid_from_csv, from_json_str, HtjDoc, Merge, TableDoc};
use hitailor_core::recommend::{Mechanism, PriorityRange};
use hitailor_core::transform::TransformOp;
use hitailor_core::visgen::{CellSize, VisConfig};
use hitailor_service::{AppState, ServiceConfig};
use serde::Deserialize;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// I/O failure or the server could not be reached.
    pub const FAILURE: i32 = 1;
    /// An input document or argument file did not parse.
    pub const PARSE: i32 = 2;
    /// A transformation script failed.
    pub const TRANSFORM: i32 = 3;
    /// A recommendation or visualization request was rejected.
    pub const VISUALIZE: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "hitailor", version, about = "Import, transform and visualize hierarchical tables")]
pub struct Cli {
    /// Base URL of a running server; without it an in-process server is used.
    #[arg(long, env = "HITAILOR_SERVER", global = true)]
    pub server: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a grid, HTJ or CSV document and write HTJ.
    Import(ImportArgs),
    /// Apply a script of transformations.
    Transform(TransformArgs),
    /// List units recommended for a reference unit.
    Recommend(RecommendArgs),
    /// Emit one chart document per unit.
    Vis(VisArgs),
}

#[derive(Debug, Args)]
pub struct ImportArgs {
    /// Input document; `-` reads stdin. Files ending in `.csv` use the CSV adapter.
    #[arg(long = "in")]
    pub input: String,
    /// Output HTJ; `-` writes stdout.
    #[arg(long)]
    pub out: String,
    /// Number of heading rows in a CSV input.
    #[arg(long)]
    pub heading_rows: Option<usize>,
    /// Number of heading columns in a CSV input.
    #[arg(long)]
    pub heading_cols: Option<usize>,
    /// JSON list of merged regions `{row, col, row_span, col_span}` for a CSV input.
    #[arg(long)]
    pub merges: Option<PathBuf>,
    /// Comma-separated row level names.
    #[arg(long, value_delimiter = ',')]
    pub row_levels: Option<Vec<String>>,
    /// Comma-separated column level names.
    #[arg(long, value_delimiter = ',')]
    pub col_levels: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long = "in")]
    pub input: String,
    /// JSON list of operations, or `{"ops": [...]}`.
    #[arg(long)]
    pub ops: String,
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct SelectionArgs {
    #[arg(long = "in")]
    pub input: String,
    /// JSON unit: `{"row": locator, "col": locator}` or `{"block": {...}}`.
    #[arg(long)]
    pub unit: String,
    /// `topology` (or `topo`) or `name`.
    #[arg(long)]
    pub mechanism: Option<String>,
    /// Row priority range `lo:hi`.
    #[arg(long)]
    pub row_range: Option<String>,
    /// Column priority range `lo:hi`.
    #[arg(long)]
    pub col_range: Option<String>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Output JSON; `-` writes stdout.
    #[arg(long, default_value = "-")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct VisArgs {
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Visualization configuration JSON.
    #[arg(long)]
    pub config: String,
    /// Output directory for `unit-<row>-<col>.vl.json`; `-` writes a JSON array to stdout.
    #[arg(long)]
    pub out: String,
    /// Cell size in pixels, `width:height`.
    #[arg(long)]
    pub cell: Option<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Maps a client failure: server rejections get `rejected`, transport problems exit 1.
fn client_error(rejected: i32) -> impl Fn(ClientError) -> CliError {
    move |e| match e {
        ClientError::Api(api) => CliError::new(rejected, describe(&api)),
        other => CliError::new(exit::FAILURE, other.to_string()),
    }
}

fn describe(e: &ApiError) -> String {
    match &e.detail {
        Some(d) if !d.is_null() => format!("{}: {} {}", e.code, e.message, d),
        _ => format!("{}: {}", e.code, e.message),
    }
}

fn read_input(path: &str) -> CliResult<String> {
    let mut text = String::new();
    if path == "-" {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::new(exit::PARSE, format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| CliError::new(exit::PARSE, format!("{path}: {e}")))?;
    }
    Ok(text)
}

fn parse_file<T: serde::de::DeserializeOwned>(path: &str, what: &str) -> CliResult<T> {
    let text = read_input(path)?;
    from_json_str(&text).map_err(|e| CliError::new(exit::PARSE, format!("{what} {path}: {e}")))
}

fn write_output(path: &str, text: &str) -> CliResult<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::new(exit::FAILURE, format!("stdout: {e}")))
    } else {
        std::fs::write(path, text).map_err(|e| CliError::new(exit::FAILURE, format!("{path}: {e}")))
    }
}

/// Status lines go to stdout unless stdout carries the result.
fn note(out: &str, line: &str) {
    if out == "-" {
        eprintln!("{line}");
    } else {
        println!("{line}");
    }
}

pub fn htj_text(doc: &HtjDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("HTJ serializes");
    s.push('\n');
    s
}

fn parse_range(text: &str, flag: &str) -> CliResult<PriorityRange> {
    let bad = || CliError::new(exit::PARSE, format!("--{flag} expects lo:hi, got {text:?}"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(PriorityRange::new(lo, hi))
}

fn parse_mechanism(text: &str) -> CliResult<Mechanism> {
    match text {
        "topology" | "topo" => Ok(Mechanism::Topology),
        "name" => Ok(Mechanism::Name),
        other => Err(CliError::new(
            exit::PARSE,
            format!("--mechanism expects topology or name, got {other:?}"),
        )),
    }
}

fn parse_cell(text: &str) -> CliResult<CellSize> {
    let bad = || CliError::new(exit::PARSE, format!("--cell expects width:height, got {text:?}"));
    let (w, h) = text.split_once(':').ok_or_else(bad)?;
    let width: f64 = w.trim().parse().map_err(|_| bad())?;
    let height: f64 = h.trim().parse().map_err(|_| bad())?;
    if !(width > 0.0 && height > 0.0) {
        return Err(bad());
    }
    Ok(CellSize { width, height })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OpsFile {
    List(Vec<TransformOp>),
    Script { ops: Vec<TransformOp> },
}

struct Selection {
    unit: UnitRef,
    mechanism: Option<Mechanism>,
    ranges: Option<Ranges>,
}

impl SelectionArgs {
    fn parse(&self) -> CliResult<Selection> {
        let unit: UnitRef = parse_file(&self.unit, "unit")?;
        let mechanism = self.mechanism.as_deref().map(parse_mechanism).transpose()?;
        let row = self.row_range.as_deref().map(|t| parse_range(t, "row-range")).transpose()?;
        let col = self.col_range.as_deref().map(|t| parse_range(t, "col-range")).transpose()?;
        let ranges = (row.is_some() || col.is_some()).then(|| Ranges {
            row: row.unwrap_or_else(PriorityRange::full),
            col: col.unwrap_or_else(PriorityRange::full),
        });
        Ok(Selection { unit, mechanism, ranges })
    }
}

/// A connection to a server, plus the in-process server if one was started.
struct Backend {
    client: Client,
    local: Option<(tokio::sync::oneshot::Sender<()>, tokio::task::JoinHandle<std::io::Result<()>>)>,
}

impl Backend {
    async fn connect(server: Option<&str>) -> CliResult<Backend> {
        if let Some(url) = server {
            let client = Client::new(url);
            client
                .health()
                .await
                .map_err(|e| CliError::new(exit::FAILURE, format!("server {url}: {e}")))?;
            return Ok(Backend { client, local: None });
        }
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
            .await
            .map_err(|e| CliError::new(exit::FAILURE, format!("cannot start local server: {e}")))?;
        let addr = listener
            .local_addr()
            .map_err(|e| CliError::new(exit::FAILURE, e.to_string()))?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let state = AppState::new(ServiceConfig::default());
        let task = tokio::spawn(hitailor_service::serve(listener, state, async {
            let _ = rx.await;
        }));
        Ok(Backend {
            client: Client::new(format!("http://{addr}")),
            local: Some((tx, task)),
        })
    }

    async fn close(self) {
        if let Some((tx, task)) = self.local {
            let _ = tx.send(());
            let _ = task.await;
        }
    }

    async fn upload(&self, path: &str) -> CliResult<SessionState> {
        let text = read_input(path)?;
        self.client.upload_json(text).await.map_err(client_error(exit::PARSE))
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let rt = match tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::FAILURE;
        }
    };
    let result = rt.block_on(async {
        let backend = Backend::connect(cli.server.as_deref()).await?;
        let out = dispatch(&backend, &cli.command).await;
        backend.close().await;
        out
    });
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

async fn dispatch(backend: &Backend, command: &Command) -> CliResult<()> {
    match command {
        Command::Import(a) => import(backend, a).await,
        Command::Transform(a) => transform(backend, a).await,
        Command::Recommend(a) => recommend(backend, a).await,
        Command::Vis(a) => vis(backend, a).await,
    }
}

fn is_csv(a: &ImportArgs) -> bool {
    a.heading_rows.is_some() || a.heading_cols.is_some() || Path::new(&a.input).extension().is_some_and(|e| e == "csv")
}

async fn import(backend: &Backend, a: &ImportArgs) -> CliResult<()> {
    let state = if is_csv(a) {
        let (Some(rows), Some(cols)) = (a.heading_rows, a.heading_cols) else {
            return Err(CliError::new(exit::PARSE, "CSV input needs --heading-rows and --heading-cols"));
        };
        let merges: Vec<Merge> = match &a.merges {
            Some(p) => parse_file(&p.to_string_lossy(), "merges")?,
            None => Vec::new(),
        };
        let mut grid = grid_from_csv(&read_input(&a.input)?, &merges, rows, cols)
            .map_err(|e| CliError::new(exit::PARSE, format!("{}: {e}", e.code())))?;
        grid.row_level_names = a.row_levels.clone();
        grid.col_level_names = a.col_levels.clone();
        backend
            .client
            .upload(&TableDoc::Grid(grid))
            .await
            .map_err(client_error(exit::PARSE))?
    } else {
        if a.row_levels.is_some() || a.col_levels.is_some() {
            return Err(CliError::new(exit::PARSE, "level names apply to CSV input only"));
        }
        backend.upload(&a.input).await?
    };
    let doc = backend
        .client
        .export_htj(&state.session_id)
        .await
        .map_err(client_error(exit::FAILURE))?;
    write_output(&a.out, &htj_text(&doc))?;
    note(&a.out, &state.summary.describe());
    Ok(())
}

async fn transform(backend: &Backend, a: &TransformArgs) -> CliResult<()> {
    let ops = match parse_file::<OpsFile>(&a.ops, "ops")? {
        OpsFile::List(ops) | OpsFile::Script { ops } => ops,
    };
    let state = backend.upload(&a.input).await?;
    let id = &state.session_id;
    let done = backend.client.script(id, &ops).await.map_err(|e| match e {
        ClientError::Api(api) => {
            let at = api
                .detail
                .as_ref()
                .and_then(|d| d.get("index"))
                .and_then(|i| i.as_u64())
                .map(|i| format!(" at op {i}"))
                .unwrap_or_default();
            CliError::new(exit::TRANSFORM, format!("{}{at}: {}", api.code, api.message))
        }
        other => CliError::new(exit::FAILURE, other.to_string()),
    })?;
    let doc = backend.client.export_htj(id).await.map_err(client_error(exit::FAILURE))?;
    write_output(&a.out, &htj_text(&doc))?;
    note(
        &a.out,
        &format!("applied {} ops; {}", ops.len(), done.summary.describe()),
    );
    Ok(())
}

async fn recommend(backend: &Backend, a: &RecommendArgs) -> CliResult<()> {
    let sel = a.selection.parse()?;
    let state = backend.upload(&a.selection.input).await?;
    let UnitRef::Locators { row, col } = sel.unit else {
        return Err(CliError::new(exit::PARSE, "recommend needs a unit given by locators"));
    };
    let ranges = sel.ranges.unwrap_or_default();
    let q = RecommendQuery::new(&row, &col, sel.mechanism.unwrap_or(Mechanism::Topology)).with_ranges(ranges.row, ranges.col);
    let recs = backend
        .client
        .recommend(&state.session_id, &q)
        .await
        .map_err(client_error(exit::VISUALIZE))?;
    let mut text = serde_json::to_string_pretty(&recs).expect("recommendations serialize");
    text.push('\n');
    write_output(&a.out, &text)?;
    note(&a.out, &format!("{} units recommended", recs.len()));
    Ok(())
}

async fn vis(backend: &Backend, a: &VisArgs) -> CliResult<()> {
    let sel = a.selection.parse()?;
    let config: VisConfig = parse_file(&a.config, "config")?;
    let cell = a.cell.as_deref().map(parse_cell).transpose()?;
    let recommended = sel.mechanism.is_some() || sel.ranges.is_some();
    let req = VisualizeRequest {
        unit: sel.unit,
        config,
        apply_to: if recommended { ApplyTo::Recommended } else { ApplyTo::Selection },
        mechanism: sel.mechanism,
        ranges: sel.ranges,
        cell,
        name: None,
    };
    let state = backend.upload(&a.selection.input).await?;
    let resp = backend
        .client
        .visualize(&state.session_id, &req)
        .await
        .map_err(client_error(exit::VISUALIZE))?;
    if a.out == "-" {
        let docs: Vec<&serde_json::Value> = resp.docs.iter().map(|d| &d.doc).collect();
        let mut text = serde_json::to_string_pretty(&docs).expect("documents serialize");
        text.push('\n');
        write_output("-", &text)?;
    } else {
        let dir = Path::new(&a.out);
        std::fs::create_dir_all(dir).map_err(|e| CliError::new(exit::FAILURE, format!("{}: {e}", dir.display())))?;
        for d in &resp.docs {
            let name = format!("unit-{}-{}.vl.json", d.unit.block.row_start, d.unit.block.col_start);
            write_output(&dir.join(name).to_string_lossy(), &d.to_json_string())?;
        }
    }
    note(&a.out, &format!("{} documents", resp.docs.len()));
    Ok(())
}
