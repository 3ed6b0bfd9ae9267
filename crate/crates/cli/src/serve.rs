use std::net::SocketAddr;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use polyguard_core::corpus;
use polyguard_core::service::{Health, Hub};
use polyguard_core::simulator::SimConfig;
use polyguard_core::Scene;
use tokio::sync::watch;

use crate::commands::{load_scene, CliError};

struct App {
    hub: Mutex<Hub>,
    ticks: watch::Receiver<u64>,
    shutdown: watch::Receiver<bool>,
}

pub fn run(input: Option<&Path>, port: u16, dt: f64) -> Result<(), CliError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CliError::Input(format!("--dt must be positive, got {dt}")));
    }
    let scene = match input {
        Some(p) => load_scene(p)?,
        None => Scene::new(corpus::example_two()).map_err(|e| CliError::Input(e.to_string()))?,
    };
    let config = SimConfig {
        dt,
        ..SimConfig::default()
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Input(format!("runtime: {e}")))?;
    runtime.block_on(serve(Hub::new(Arc::new(scene), config), port, dt))
}

async fn serve(hub: Hub, port: u16, dt: f64) -> Result<(), CliError> {
    let (tick_tx, ticks) = watch::channel(0u64);
    let (stop_tx, shutdown) = watch::channel(false);
    let app = Arc::new(App {
        hub: Mutex::new(hub),
        ticks,
        shutdown,
    });

    let ticker = {
        let app = Arc::clone(&app);
        let mut stop = app.shutdown.clone();
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(Duration::from_secs_f64(dt));
            interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
            let mut n = 0u64;
            loop {
                tokio::select! {
                    _ = interval.tick() => {
                        app.hub.lock().expect("hub lock").tick_all();
                        n += 1;
                        tick_tx.send_replace(n);
                    }
                    _ = stop.changed() => break,
                }
            }
        })
    };

    let router = Router::new()
        .route("/health", get(health))
        .route("/ws", get(upgrade))
        .with_state(Arc::clone(&app));
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| CliError::Input(format!("bind {addr}: {e}")))?;
    let local = listener.local_addr().map_err(|e| CliError::Input(e.to_string()))?;
    println!("listening on http://{local}");

    axum::serve(listener, router)
        .with_graceful_shutdown(async move {
            shutdown_signal().await;
            let _ = stop_tx.send(true);
        })
        .await
        .map_err(|e| CliError::Input(format!("server: {e}")))?;
    let _ = ticker.await;
    println!("shut down");
    Ok(())
}

async fn shutdown_signal() {
    #[cfg(unix)]
    {
        let mut term = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()).expect("signal handler");
        tokio::select! {
            _ = tokio::signal::ctrl_c() => {}
            _ = term.recv() => {}
        }
    }
    #[cfg(not(unix))]
    {
        let _ = tokio::signal::ctrl_c().await;
    }
}

async fn health(State(app): State<Arc<App>>) -> Json<Health> {
    Json(app.hub.lock().expect("hub lock").health())
}

async fn upgrade(ws: WebSocketUpgrade, State(app): State<Arc<App>>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| session(socket, app))
}

async fn session(mut socket: WebSocket, app: Arc<App>) {
    let id = app.hub.lock().expect("hub lock").open();
    let mut ticks = app.ticks.clone();
    let mut stop = app.shutdown.clone();
    loop {
        tokio::select! {
            msg = socket.recv() => match msg {
                Some(Ok(Message::Text(text))) => {
                    // Malformed input is answered in the session stream.
                    let _ = app.hub.lock().expect("hub lock").submit_json(id, text.as_str());
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
            changed = ticks.changed() => {
                if changed.is_err() {
                    break;
                }
                let out = app.hub.lock().expect("hub lock").drain(id).unwrap_or_default();
                let mut failed = false;
                for m in out {
                    let text = serde_json::to_string(&m).expect("json");
                    if socket.send(Message::Text(text.into())).await.is_err() {
                        failed = true;
                        break;
                    }
                }
                if failed {
                    break;
                }
            }
            _ = stop.changed() => {
                let _ = socket.send(Message::Close(None)).await;
                break;
            }
        }
    }
    app.hub.lock().expect("hub lock").close(id);
}
