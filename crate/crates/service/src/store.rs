//! In-memory sessions with optional JSON snapshots on disk.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use hitailor_core::api::{ApiError, SessionState, StoredVis, ModelSummary};
use hitailor_core::importer::{parse_htj, serialize_htj, HtjDoc};
use hitailor_core::model::TableModel;
use hitailor_core::transform::{History, TransformOp};
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

/// Mutable state of one session; only touched under the session's write lock.
#[derive(Debug)]
pub struct Session {
    pub history: History,
    pub visualizations: BTreeMap<String, StoredVis>,
}

impl Session {
    pub fn new(model: TableModel) -> Self {
        Session {
            history: History::new(model),
            visualizations: BTreeMap::new(),
        }
    }
}

/// Read-only copy of a session as of its last committed write.
#[derive(Debug)]
pub struct View {
    pub id: String,
    pub revision: u64,
    pub initial: Arc<TableModel>,
    pub ops: Vec<TransformOp>,
    pub model: Arc<TableModel>,
    pub can_redo: bool,
    pub visualizations: Arc<BTreeMap<String, StoredVis>>,
}

impl View {
    pub fn state(&self) -> SessionState {
        SessionState {
            session_id: self.id.clone(),
            summary: ModelSummary::of(&self.model),
            history_len: self.ops.len(),
            can_redo: self.can_redo,
        }
    }
}

pub struct Slot {
    writer: Mutex<Session>,
    view: RwLock<Arc<View>>,
    persisted: AtomicU64,
}

impl Slot {
    fn new(id: String, session: Session) -> Self {
        let view = snapshot(&id, 1, &session);
        Slot {
            writer: Mutex::new(session),
            view: RwLock::new(Arc::new(view)),
            persisted: AtomicU64::new(0),
        }
    }

    pub fn view(&self) -> Arc<View> {
        self.view.read().expect("view lock").clone()
    }

    /// Runs `f` with exclusive access to the session. The view is republished
    /// whether or not `f` fails, so partial writes never become visible unannounced.
    pub async fn write<T>(&self, f: impl FnOnce(&mut Session) -> Result<T, ApiError>) -> Result<(T, Arc<View>), ApiError> {
        let mut session = self.writer.lock().await;
        let out = f(&mut session);
        let previous = self.view();
        let view = Arc::new(snapshot(&previous.id, previous.revision + 1, &session));
        *self.view.write().expect("view lock") = view.clone();
        out.map(|t| (t, view))
    }
}

fn snapshot(id: &str, revision: u64, s: &Session) -> View {
    View {
        id: id.to_string(),
        revision,
        initial: Arc::new(s.history.initial().clone()),
        ops: s.history.ops(),
        model: Arc::new(s.history.current().clone()),
        can_redo: s.history.can_redo(),
        visualizations: Arc::new(s.visualizations.clone()),
    }
}

/// On-disk form of a session.
#[derive(Debug, Serialize, Deserialize)]
pub struct SessionFile {
    pub session_id: String,
    pub initial: HtjDoc,
    pub ops: Vec<TransformOp>,
    pub visualizations: BTreeMap<String, StoredVis>,
}

#[derive(Default)]
pub struct Store {
    sessions: RwLock<HashMap<String, Arc<Slot>>>,
}

impl Store {
    pub fn insert(&self, model: TableModel) -> Arc<Slot> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.insert_with_id(id, Session::new(model))
    }

    fn insert_with_id(&self, id: String, session: Session) -> Arc<Slot> {
        let slot = Arc::new(Slot::new(id.clone(), session));
        self.sessions.write().expect("store lock").insert(id, slot.clone());
        slot
    }

    pub fn get(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    pub fn remove(&self, id: &str) -> Result<(), ApiError> {
        self.sessions
            .write()
            .expect("store lock")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ApiError::not_found(id))
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slots(&self) -> Vec<Arc<Slot>> {
        self.sessions.read().expect("store lock").values().cloned().collect()
    }

    /// Writes every session changed since its last snapshot. Returns how many were written.
    pub fn persist(&self, dir: &Path) -> std::io::Result<usize> {
        std::fs::create_dir_all(dir)?;
        let mut written = 0;
        for slot in self.slots() {
            let view = slot.view();
            if slot.persisted.load(Ordering::Acquire) == view.revision {
                continue;
            }
            let file = SessionFile {
                session_id: view.id.clone(),
                initial: serialize_htj(&view.initial),
                ops: view.ops.clone(),
                visualizations: (*view.visualizations).clone(),
            };
            let tmp = dir.join(format!("{}.json.tmp", view.id));
            std::fs::write(&tmp, serde_json::to_vec_pretty(&file)?)?;
            std::fs::rename(&tmp, session_path(dir, &view.id))?;
            slot.persisted.store(view.revision, Ordering::Release);
            written += 1;
        }
        Ok(written)
    }

    /// Loads every `*.json` session file in `dir`, skipping unreadable ones.
    pub fn restore(&self, dir: &Path) -> std::io::Result<usize> {
        let Ok(entries) = std::fs::read_dir(dir) else {
            return Ok(0);
        };
        let mut loaded = 0;
        for entry in entries {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            match load_session(&path) {
                Ok((id, session)) => {
                    let slot = self.insert_with_id(id, session);
                    slot.persisted.store(slot.view().revision, Ordering::Release);
                    loaded += 1;
                }
                Err(e) => tracing::warn!("skipping {}: {e}", path.display()),
            }
        }
        Ok(loaded)
    }
}

fn session_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.json"))
}

fn load_session(path: &Path) -> Result<(String, Session), String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let file: SessionFile = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let initial = parse_htj(&file.initial).map_err(|e| e.to_string())?;
    let mut history = History::new(initial);
    history.push_all(&file.ops).map_err(|e| e.to_string())?;
    Ok((
        file.session_id,
        Session {
            history,
            visualizations: file.visualizations,
        },
    ))
}
