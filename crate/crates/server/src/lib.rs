//! Network front end for the aggregator.
//!
//! Any number of TCP connections send LF-delimited wire lines. Every line is
//! handed to one applier task, which journals it, mutates the state under a
//! write lock and answers with an ack line. HTTP GET queries take a read lock,
//! so they never see a half-applied event.

use std::collections::BTreeMap;
use std::io;
use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Query as QueryParams, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use synchroflow::aggregator::{
    read_journal, AggregatorConfig, AggregatorState, ConfigError, FileJournal, JournalSink,
    NoJournal, Query, QueryError, ReplayReport,
};
use tokio::io::{AsyncBufReadExt, AsyncReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{mpsc, oneshot, watch};
use tokio::task::JoinHandle;

/// Longest accepted line, LF included. Longer lines are acked invalid and
/// the connection is closed.
pub const MAX_LINE_BYTES: usize = 64 * 1024;

const APPLY_QUEUE: usize = 1024;

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error("journal {path}: {source}")]
    Journal { path: String, source: io::Error },
}

pub type SharedState = Arc<RwLock<AggregatorState>>;

struct ApplyRequest {
    line: Vec<u8>,
    reply: oneshot::Sender<String>,
}

/// A running aggregator.
pub struct Server {
    ingest_addr: SocketAddr,
    http_addr: SocketAddr,
    state: SharedState,
    replay: ReplayReport,
    shutdown: watch::Sender<bool>,
    ingest_task: JoinHandle<()>,
    http_task: JoinHandle<io::Result<()>>,
    applier_task: JoinHandle<io::Result<()>>,
}

impl Server {
    /// Replays the journal (if any), binds both sockets and starts serving.
    pub async fn start(config: &AggregatorConfig) -> Result<Server, ServeError> {
        let mut state = config.new_state()?;
        let mut replay = ReplayReport::default();
        let journal: Box<dyn JournalSink + Send> = match &config.journal {
            Some(path) => {
                let journal_err = |source| ServeError::Journal {
                    path: path.display().to_string(),
                    source,
                };
                let text = read_journal(path).map_err(journal_err)?;
                replay = state.replay(&text);
                if replay.lines > 0 {
                    tracing::info!(
                        applied = replay.applied,
                        duplicates = replay.duplicates,
                        corrupt = replay.corrupt,
                        "journal replayed"
                    );
                }
                Box::new(FileJournal::open(path, config.fsync).map_err(journal_err)?)
            }
            None => Box::new(NoJournal),
        };

        let ingest = TcpListener::bind(config.listen)
            .await
            .map_err(|source| ServeError::Bind {
                addr: config.listen,
                source,
            })?;
        let http = TcpListener::bind(config.http)
            .await
            .map_err(|source| ServeError::Bind {
                addr: config.http,
                source,
            })?;
        let ingest_addr = ingest.local_addr().expect("bound socket has an address");
        let http_addr = http.local_addr().expect("bound socket has an address");

        let state: SharedState = Arc::new(RwLock::new(state));
        let (shutdown, shutdown_rx) = watch::channel(false);
        let (apply_tx, apply_rx) = mpsc::channel(APPLY_QUEUE);

        let applier_task = tokio::spawn(run_applier(state.clone(), journal, apply_rx));
        let ingest_task = tokio::spawn(run_ingest(ingest, apply_tx, shutdown_rx.clone()));
        let router = Router::new()
            .route("/sankey", get(handle_query))
            .route("/bars", get(handle_query))
            .route("/balance", get(handle_query))
            .route("/metrics", get(handle_query))
            .route("/snapshot", get(handle_query))
            .fallback(handle_not_found)
            .with_state(state.clone());
        let mut http_shutdown = shutdown_rx;
        let http_task = tokio::spawn(async move {
            axum::serve(http, router)
                .with_graceful_shutdown(async move {
                    let _ = http_shutdown.wait_for(|stop| *stop).await;
                })
                .await
        });
        tracing::info!(%ingest_addr, %http_addr, "aggregator listening");

        Ok(Server {
            ingest_addr,
            http_addr,
            state,
            replay,
            shutdown,
            ingest_task,
            http_task,
            applier_task,
        })
    }

    pub fn ingest_addr(&self) -> SocketAddr {
        self.ingest_addr
    }

    pub fn http_addr(&self) -> SocketAddr {
        self.http_addr
    }

    pub fn replay_report(&self) -> ReplayReport {
        self.replay
    }

    pub fn state(&self) -> SharedState {
        self.state.clone()
    }

    /// Stops accepting, lets queued lines finish, flushes the journal.
    pub async fn shutdown(self) -> io::Result<()> {
        let _ = self.shutdown.send(true);
        let _ = self.ingest_task.await;
        let http = self.http_task.await.map_err(io::Error::other)?;
        let applied = self.applier_task.await.map_err(io::Error::other)?;
        http.and(applied)
    }
}

async fn run_applier(
    state: SharedState,
    mut journal: Box<dyn JournalSink + Send>,
    mut rx: mpsc::Receiver<ApplyRequest>,
) -> io::Result<()> {
    while let Some(req) = rx.recv().await {
        let ack = {
            let mut guard = state
                .write()
                .unwrap_or_else(|poisoned| poisoned.into_inner());
            guard.ingest_line(&req.line, journal.as_mut())
        };
        let _ = req.reply.send(ack.to_json());
    }
    journal.flush()
}

async fn run_ingest(
    listener: TcpListener,
    apply: mpsc::Sender<ApplyRequest>,
    mut shutdown: watch::Receiver<bool>,
) {
    let mut connections = Vec::new();
    let for_connections = shutdown.clone();
    loop {
        tokio::select! {
            _ = shutdown.wait_for(|stop| *stop) => break,
            accepted = listener.accept() => match accepted {
                Ok((stream, peer)) => {
                    tracing::debug!(%peer, "ingest connection");
                    connections.push(tokio::spawn(serve_connection(stream, apply.clone(), for_connections.clone())));
                }
                Err(e) => tracing::warn!(error = %e, "accept failed"),
            },
        }
        connections.retain(|c: &JoinHandle<()>| !c.is_finished());
    }
    drop(apply);
    for c in connections {
        let _ = c.await;
    }
}

async fn serve_connection(
    stream: TcpStream,
    apply: mpsc::Sender<ApplyRequest>,
    mut shutdown: watch::Receiver<bool>,
) {
    let (read, mut write) = stream.into_split();
    let mut reader = BufReader::new(read);
    let mut line = Vec::new();
    loop {
        line.clear();
        let mut limited = (&mut reader).take(MAX_LINE_BYTES as u64);
        let n = tokio::select! {
            _ = shutdown.wait_for(|stop| *stop) => break,
            n = limited.read_until(b'\n', &mut line) => n,
        };
        let n = match n {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) => {
                tracing::debug!(error = %e, "ingest read failed");
                break;
            }
        };
        let oversized = n == MAX_LINE_BYTES && line.last() != Some(&b'\n');
        if oversized {
            let _ = write
                .write_all(b"{\"seq\":null,\"status\":\"invalid\",\"reason\":\"line_too_long\"}\n")
                .await;
            break;
        }
        let (reply, ack) = oneshot::channel();
        if apply
            .send(ApplyRequest {
                line: line.clone(),
                reply,
            })
            .await
            .is_err()
        {
            break;
        }
        let Ok(mut ack) = ack.await else { break };
        ack.push('\n');
        if write.write_all(ack.as_bytes()).await.is_err() {
            break;
        }
    }
    let _ = write.shutdown().await;
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error_response(e: QueryError) -> Response {
    let status = if e.is_not_found() {
        StatusCode::NOT_FOUND
    } else {
        StatusCode::BAD_REQUEST
    };
    json_response(status, e.to_json())
}

async fn handle_query(
    State(state): State<SharedState>,
    uri: Uri,
    params: Result<QueryParams<BTreeMap<String, String>>, axum::extract::rejection::QueryRejection>,
) -> Response {
    let params = match params {
        Ok(QueryParams(p)) => p,
        Err(e) => return error_response(QueryError::new("invalid_request", e.body_text())),
    };
    let query = match Query::from_http(uri.path(), &params) {
        Ok(q) => q,
        Err(e) => return error_response(e),
    };
    let answer = {
        let guard = state
            .read()
            .unwrap_or_else(|poisoned| poisoned.into_inner());
        guard.query(&query)
    };
    match answer {
        Ok(body) => json_response(StatusCode::OK, body),
        Err(e) => error_response(e),
    }
}

async fn handle_not_found(uri: Uri) -> Response {
    error_response(QueryError::not_found(uri.path()))
}
