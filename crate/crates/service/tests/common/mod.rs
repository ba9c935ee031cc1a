#![allow(dead_code)]

use hitailor_client::Client;
use hitailor_core::importer::{fixture_grid, TableDoc};
use hitailor_service::{AppState, ServiceConfig};

pub struct Server {
    pub client: Client,
    pub state: AppState,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<()>>,
}

impl Server {
    pub async fn start() -> Server {
        Server::with_config(ServiceConfig::default()).await
    }

    pub async fn with_config(config: ServiceConfig) -> Server {
        let state = AppState::new(config);
        state.restore().unwrap();
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = tokio::sync::oneshot::channel();
        let task = tokio::spawn(hitailor_service_serve(listener, state.clone(), rx));
        Server {
            client: Client::new(format!("http://{addr}")),
            state,
            stop: Some(tx),
            task: Some(task),
        }
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.task.take() {
            t.await.unwrap();
        }
    }
}

async fn hitailor_service_serve(listener: tokio::net::TcpListener, state: AppState, rx: tokio::sync::oneshot::Receiver<()>) {
    hitailor_service::serve(listener, state, async {
        let _ = rx.await;
    })
    .await
    .unwrap();
}

pub fn fixture_doc() -> TableDoc {
    TableDoc::Grid(fixture_grid())
}
