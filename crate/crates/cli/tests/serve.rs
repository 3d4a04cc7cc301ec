use std::time::Duration;

use considerate_cli::serve::{bind, ServerState};
use considerate_core::sim::Condition;
use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(out: &std::path::Path) -> String {
    let state = ServerState::new(Condition::Psi0001, 5, out.to_path_buf());
    let (addr, server) = bind("127.0.0.1:0", state).await.unwrap();
    tokio::spawn(server);
    format!("ws://{addr}/ws")
}

async fn send(ws: &mut Ws, text: &str) {
    ws.send(Message::Text(text.into())).await.unwrap();
}

async fn next_json(ws: &mut Ws) -> Value {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("frame within 5 s")
            .expect("stream open")
            .expect("valid frame");
        if let Message::Text(t) = msg {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

async fn next_of(ws: &mut Ws, kind: &str) -> Value {
    loop {
        let v = next_json(ws).await;
        if v["type"] == kind {
            return v;
        }
    }
}

#[tokio::test]
async fn join_input_and_errors_over_websocket() {
    let tmp = tempfile::tempdir().unwrap();
    let url = start(tmp.path()).await;
    let (mut ws, _) = connect_async(format!("{url}?session=a&seed=3&debug=true"))
        .await
        .unwrap();

    send(&mut ws, r#"{"type":"input","seq":1,"move":[1,0]}"#).await;
    assert_eq!(next_json(&mut ws).await["code"], "not_joined");

    send(&mut ws, r#"{"type":"join","session":"a"}"#).await;
    let config = next_json(&mut ws).await;
    assert_eq!(config["type"], "config");
    assert_eq!(config["session"], "a");
    assert_eq!(config["seed"], 3);
    assert_eq!(config["condition"], "psi_0.001");
    assert_eq!(config["debug"], true);

    let first = next_of(&mut ws, "state").await;
    assert!(first["debug"].is_array());
    send(&mut ws, r#"{"type":"input","seq":1,"move":[0,1]}"#).await;
    let mut last_t = first["t"].as_u64().unwrap();
    for _ in 0..10 {
        let s = next_of(&mut ws, "state").await;
        let t = s["t"].as_u64().unwrap();
        assert_eq!(t, last_t + 1, "ticks are contiguous");
        last_t = t;
    }

    send(&mut ws, "{oops").await;
    assert_eq!(next_of(&mut ws, "error").await["code"], "bad_json");
    send(&mut ws, r#"{"type":"dance"}"#).await;
    assert_eq!(next_of(&mut ws, "error").await["code"], "bad_type");
    send(&mut ws, r#"{"type":"join","session":"b"}"#).await;
    assert_eq!(next_of(&mut ws, "error").await["code"], "bad_message");
    ws.close(None).await.unwrap();
}

#[tokio::test]
async fn two_clients_share_one_session() {
    let tmp = tempfile::tempdir().unwrap();
    let url = start(tmp.path()).await;
    let (mut a, _) = connect_async(format!("{url}?session=shared")).await.unwrap();
    let (mut b, _) = connect_async(format!("{url}?session=shared&condition=random_walk"))
        .await
        .unwrap();
    send(&mut a, r#"{"type":"join"}"#).await;
    assert_eq!(next_json(&mut a).await["condition"], "psi_0.001");
    send(&mut b, r#"{"type":"join"}"#).await;
    assert_eq!(next_json(&mut b).await["condition"], "psi_0.001");
    let ta = next_of(&mut a, "state").await["t"].as_u64().unwrap();
    let tb = next_of(&mut b, "state").await["t"].as_u64().unwrap();
    assert!(ta.abs_diff(tb) < 40);
}

#[tokio::test]
async fn unknown_condition_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let url = start(tmp.path()).await;
    let err = connect_async(format!("{url}?session=z&condition=psi_9")).await;
    assert!(err.is_err());
}
