//! WebSocket host for live sessions.
//!
//! Every session is owned by one task that ticks it on a 50 ms interval.
//! Connections talk to that task through a command queue and receive state
//! frames from a broadcast channel; replies meant for a single connection
//! (config, errors) go back on a per-connection queue.

use std::collections::{HashMap, HashSet};
use std::future::IntoFuture;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use considerate_core::model::TICK_SECONDS;
use considerate_core::session::{
    parse_client_message, ClientMessage, ErrorCode, ServerMessage, Session, SessionConfig,
};
use considerate_core::sim::Condition;
use futures_util::{SinkExt, StreamExt};
use serde::Deserialize;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc};
use tokio::time::MissedTickBehavior;

use crate::config::default_out_dir;
use crate::{CliError, ServeArgs};

const FRAME_BUFFER: usize = 256;
pub const DEFAULT_SESSION: &str = "default";

enum Command {
    Text {
        conn: u64,
        text: String,
        reply: mpsc::UnboundedSender<String>,
    },
    Disconnect {
        conn: u64,
    },
}

#[derive(Clone)]
struct SessionHandle {
    commands: mpsc::UnboundedSender<Command>,
    frames: broadcast::Sender<Arc<str>>,
}

pub struct ServerState {
    sessions: Mutex<HashMap<String, SessionHandle>>,
    condition: Condition,
    seed: u64,
    out: PathBuf,
    next_conn: AtomicU64,
}

impl ServerState {
    pub fn new(condition: Condition, seed: u64, out: PathBuf) -> Arc<Self> {
        Arc::new(ServerState {
            sessions: Mutex::new(HashMap::new()),
            condition,
            seed,
            out,
            next_conn: AtomicU64::new(0),
        })
    }
}

/// Query parameters of `/ws`. They only matter for the connection that
/// creates a session; later connections join it as configured.
#[derive(Debug, Default, Deserialize)]
pub struct SessionQuery {
    pub session: Option<String>,
    pub condition: Option<String>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub debug: bool,
    #[serde(default)]
    pub practice: bool,
}

fn session_handle(state: &Arc<ServerState>, q: &SessionQuery) -> Result<SessionHandle, String> {
    let id = q.session.clone().unwrap_or_else(|| DEFAULT_SESSION.into());
    let mut sessions = state.sessions.lock().expect("session registry poisoned");
    if let Some(h) = sessions.get(&id) {
        return Ok(h.clone());
    }
    let condition = match &q.condition {
        Some(c) => c.parse::<Condition>().map_err(|e| e.to_string())?,
        None => state.condition,
    };
    let config = SessionConfig {
        debug: q.debug,
        practice: q.practice,
        ..SessionConfig::new(condition, q.seed.unwrap_or(state.seed))
    };
    let session = Session::new(id.clone(), config).map_err(|e| e.to_string())?;
    let (commands, rx) = mpsc::unbounded_channel();
    let (frames, _) = broadcast::channel(FRAME_BUFFER);
    let handle = SessionHandle { commands, frames };
    sessions.insert(id, handle.clone());
    tokio::spawn(run_session(session, rx, handle.frames.clone(), state.clone()));
    Ok(handle)
}

fn reply(tx: &mpsc::UnboundedSender<String>, msgs: Vec<ServerMessage>) {
    for m in msgs {
        let _ = tx.send(m.to_json());
    }
}

fn persist(session: &Session, state: &ServerState) {
    let log = session.log();
    if let Err(e) = log.write(&state.out) {
        eprintln!("session {}: {e}", session.id());
        return;
    }
    let path = state.out.join(format!("{}.session.json", log.meta.name));
    let record = serde_json::to_string_pretty(&session.record()).expect("record serializes");
    if let Err(e) = std::fs::write(&path, record + "\n") {
        eprintln!("session {}: {}: {e}", session.id(), path.display());
    }
}

async fn run_session(
    mut session: Session,
    mut rx: mpsc::UnboundedReceiver<Command>,
    frames: broadcast::Sender<Arc<str>>,
    state: Arc<ServerState>,
) {
    let period = Duration::from_secs_f64(TICK_SECONDS);
    let mut interval = tokio::time::interval(period);
    // A late wake-up runs the missed ticks back to back: simulated time is
    // authoritative and no tick is ever skipped.
    interval.set_missed_tick_behavior(MissedTickBehavior::Burst);
    let mut joined: HashSet<u64> = HashSet::new();

    loop {
        tokio::select! {
            cmd = rx.recv() => {
                let Some(cmd) = cmd else { break };
                let was_running = session.is_running();
                match cmd {
                    Command::Text { conn, text, reply: tx } => match parse_client_message(&text) {
                        Err((code, message)) => reply(&tx, vec![ServerMessage::Error { code, message }]),
                        Ok(ClientMessage::Join { session: Some(s) }) if s != session.id() => {
                            reply(&tx, vec![ServerMessage::Error {
                                code: ErrorCode::BadMessage,
                                message: format!("this connection belongs to session `{}`", session.id()),
                            }]);
                        }
                        Ok(msg @ ClientMessage::Join { .. }) => {
                            if joined.insert(conn) {
                                reply(&tx, session.handle(msg));
                            } else {
                                reply(&tx, vec![ServerMessage::Config(session.config_frame())]);
                            }
                        }
                        Ok(ClientMessage::Leave) => {
                            if joined.remove(&conn) {
                                session.handle(ClientMessage::Leave);
                            }
                        }
                        Ok(msg @ ClientMessage::Input { .. }) => {
                            if joined.contains(&conn) {
                                reply(&tx, session.handle(msg));
                            } else {
                                reply(&tx, vec![ServerMessage::Error {
                                    code: ErrorCode::NotJoined,
                                    message: "join before sending input".into(),
                                }]);
                            }
                        }
                    },
                    Command::Disconnect { conn } => {
                        if joined.remove(&conn) {
                            session.handle(ClientMessage::Leave);
                        }
                    }
                }
                if !was_running && session.is_running() {
                    interval.reset();
                }
                if session.is_finished() && joined.is_empty() {
                    break;
                }
            }
            _ = interval.tick(), if session.is_running() => {
                for m in session.tick() {
                    if matches!(m, ServerMessage::TrialDone { .. }) {
                        persist(&session, &state);
                    }
                    let _ = frames.send(m.to_json().into());
                }
            }
        }
    }
    state
        .sessions
        .lock()
        .expect("session registry poisoned")
        .remove(session.id());
}

async fn ws_handler(
    ws: WebSocketUpgrade,
    Query(q): Query<SessionQuery>,
    State(state): State<Arc<ServerState>>,
) -> Response {
    let handle = match session_handle(&state, &q) {
        Ok(h) => h,
        Err(message) => return (StatusCode::BAD_REQUEST, message).into_response(),
    };
    let conn = state.next_conn.fetch_add(1, Ordering::Relaxed);
    ws.on_upgrade(move |socket| client(socket, handle, conn))
}

async fn client(socket: WebSocket, handle: SessionHandle, conn: u64) {
    let (mut sink, mut stream) = socket.split();
    let mut frames = handle.frames.subscribe();
    let (reply_tx, mut reply_rx) = mpsc::unbounded_channel::<String>();
    loop {
        let outgoing: String = tokio::select! {
            // Replies first: a config reply must precede the frames that follow the join.
            biased;
            Some(r) = reply_rx.recv() => r,
            msg = stream.next() => match msg {
                Some(Ok(Message::Text(text))) => {
                    let cmd = Command::Text { conn, text: text.to_string(), reply: reply_tx.clone() };
                    if handle.commands.send(cmd).is_err() {
                        break;
                    }
                    continue;
                }
                Some(Ok(Message::Binary(_))) => ServerMessage::Error {
                    code: ErrorCode::BadJson,
                    message: "expected a text frame".into(),
                }
                .to_json(),
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => continue,
            },
            frame = frames.recv() => match frame {
                Ok(f) => f.to_string(),
                // A slow client misses frames; the session log is unaffected.
                Err(broadcast::error::RecvError::Lagged(_)) => continue,
                Err(broadcast::error::RecvError::Closed) => break,
            },
        };
        if sink.send(Message::Text(outgoing.into())).await.is_err() {
            break;
        }
    }
    let _ = handle.commands.send(Command::Disconnect { conn });
}

pub fn router(state: Arc<ServerState>) -> Router {
    Router::new()
        .route("/ws", get(ws_handler))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(state)
}

/// Binds `addr` and returns the bound address with the server future.
pub async fn bind(
    addr: &str,
    state: Arc<ServerState>,
) -> std::io::Result<(SocketAddr, impl std::future::Future<Output = std::io::Result<()>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let server = axum::serve(listener, router(state)).with_graceful_shutdown(async {
        let _ = tokio::signal::ctrl_c().await;
    });
    Ok((local, server.into_future()))
}

pub fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let out = args.out.clone().unwrap_or_else(default_out_dir);
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io(&out, e))?;
    let addr = format!("{}:{}", args.host, args.port);
    runtime.block_on(async {
        let state = ServerState::new(args.condition, args.seed, out.clone());
        let (local, server) = bind(&addr, state).await.map_err(|e| CliError::Io {
            path: PathBuf::from(&addr),
            source: e,
        })?;
        eprintln!("listening on ws://{local}/ws, session logs in {}", out.display());
        server.await.map_err(|e| CliError::Io {
            path: PathBuf::from(&addr),
            source: e,
        })
    })
}
