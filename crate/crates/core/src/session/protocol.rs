//! JSON messages exchanged with session clients, one object per frame.

use serde::{Deserialize, Serialize};

use crate::sim::{Condition, FieldLayout, Target};

/// Client to server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Join {
        #[serde(default)]
        session: Option<String>,
    },
    Input {
        seq: u64,
        #[serde(rename = "move")]
        mv: [f64; 2],
    },
    Leave,
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Config(ConfigFrame),
    State(StateFrame),
    Error { code: ErrorCode, message: String },
    TrialDone { summary: TrialSummary },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// The frame is not valid JSON.
    BadJson,
    /// Missing or unknown `type`.
    BadType,
    /// Known `type` with missing or malformed fields.
    BadMessage,
    /// Input sent before joining.
    NotJoined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFrame {
    pub session: String,
    pub condition: Condition,
    pub seed: u64,
    pub tick_seconds: f64,
    pub v_max: f64,
    pub layout: FieldLayout,
    pub participant_id: String,
    pub robot_id: String,
    pub debug: bool,
    pub practice: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPose {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

/// Internal state of an agent, sent only when the debug overlay is on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentDebug {
    pub id: String,
    pub c: f64,
    pub a: f64,
    pub c_hat: f64,
    pub a_hat: f64,
    pub informative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub t: u64,
    pub task: usize,
    pub target: Target,
    pub agents: Vec<AgentPose>,
    pub task_done: bool,
    pub trial_done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug: Option<Vec<AgentDebug>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSummary {
    pub task: usize,
    pub target: Target,
    pub ticks: u64,
    pub timed_out: bool,
    pub a_void: Option<f64>,
    pub path_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub tasks: Vec<TaskSummary>,
    pub mean_a_void: Option<f64>,
}

/// Parses one inbound frame, mapping failures onto protocol error codes.
pub fn parse_client_message(text: &str) -> Result<ClientMessage, (ErrorCode, String)> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| (ErrorCode::BadJson, e.to_string()))?;
    let kind = value
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| (ErrorCode::BadType, "missing string field `type`".to_string()))?;
    if !matches!(kind, "join" | "input" | "leave") {
        return Err((ErrorCode::BadType, format!("unknown message type `{kind}`")));
    }
    serde_json::from_value(value).map_err(|e| (ErrorCode::BadMessage, e.to_string()))
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_client_messages() {
        assert_eq!(
            parse_client_message(r#"{"type":"join","session":"s1"}"#).unwrap(),
            ClientMessage::Join {
                session: Some("s1".into())
            }
        );
        assert_eq!(
            parse_client_message(r#"{"type":"input","seq":3,"move":[0.5,-1]}"#).unwrap(),
            ClientMessage::Input {
                seq: 3,
                mv: [0.5, -1.0]
            }
        );
        assert_eq!(
            parse_client_message(r#"{"type":"leave"}"#).unwrap(),
            ClientMessage::Leave
        );
    }

    #[test]
    fn classifies_errors() {
        assert_eq!(parse_client_message("{nope").unwrap_err().0, ErrorCode::BadJson);
        assert_eq!(
            parse_client_message(r#"{"type":"dance"}"#).unwrap_err().0,
            ErrorCode::BadType
        );
        assert_eq!(parse_client_message("[1,2]").unwrap_err().0, ErrorCode::BadType);
        assert_eq!(
            parse_client_message(r#"{"type":"input","seq":1}"#).unwrap_err().0,
            ErrorCode::BadMessage
        );
        assert_eq!(
            parse_client_message(r#"{"type":"input","seq":-1,"move":[0,0]}"#)
                .unwrap_err()
                .0,
            ErrorCode::BadMessage
        );
    }

    #[test]
    fn error_frame_shape() {
        let m = ServerMessage::Error {
            code: ErrorCode::BadType,
            message: "x".into(),
        };
        assert_eq!(m.to_json(), r#"{"type":"error","code":"bad_type","message":"x"}"#);
    }
}
