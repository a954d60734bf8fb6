//! Reset/step environment service over newline-delimited JSON.
//!
//! Every frame carries `"v": 1` and a `"type"`. Clients send `reset` and
//! `step`; the server answers with a frame of the same type or an `error`
//! frame. Errors never close the connection. Sessions live as long as the
//! connection that created them and are numbered `s1`, `s2`, ... per
//! connection. Responses are canonical JSON (sorted keys), so a scripted
//! session always produces the same bytes. Field-by-field documentation
//! lives in `docs/protocol.md`.

use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::actionlang::{execute, parse_response, serialize_observation, StepOutcome};
use crate::canonical::to_canonical_json;
use crate::reward::{compute_reward, judge_success, RewardBreakdown, RewardParams};
use crate::scenegraph::{EnvSnapshot, Site};
use crate::world::{scene_task, GenProfile, Task};

pub const ENV_PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadRequest,
    UnsupportedVersion,
    UnknownSession,
    SessionFinished,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct ResetRequest {
    seed: u64,
    #[serde(default)]
    run: u64,
    #[serde(default)]
    profile: Option<GenProfile>,
    #[serde(default)]
    reward_params: Option<RewardParams>,
    #[serde(default)]
    max_steps: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct StepRequest {
    session: String,
    response_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionParams {
    pub reward_params: RewardParams,
    pub max_steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetResponse {
    pub v: u64,
    #[serde(rename = "type")]
    pub kind: String,
    pub session: String,
    pub system: String,
    pub observation: String,
    pub task: Task,
    pub params: SessionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResponse {
    pub v: u64,
    #[serde(rename = "type")]
    pub kind: String,
    pub session: String,
    pub observation: String,
    pub reward: RewardBreakdown,
    pub outcome: StepOutcome,
    pub done: bool,
    pub success: bool,
    pub steps_remaining: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub v: u64,
    #[serde(rename = "type")]
    pub kind: String,
    pub code: ErrorCode,
    pub message: String,
}

pub struct Session {
    pub snapshot: EnvSnapshot,
    pub task: Task,
    pub params: SessionParams,
    pub steps_taken: u32,
    pub finished: bool,
}

/// All sessions opened on one connection.
#[derive(Default)]
pub struct Connection {
    sessions: BTreeMap<String, Session>,
    next_id: u64,
}

fn error(code: ErrorCode, message: impl Into<String>) -> String {
    to_canonical_json(&ErrorResponse {
        v: ENV_PROTOCOL_VERSION,
        kind: "error".into(),
        code,
        message: message.into(),
    })
}

impl Connection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn session(&self, id: &str) -> Option<&Session> {
        self.sessions.get(id)
    }

    /// Handles one request line and returns one response line (no newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        let value: Value = match serde_json::from_str(line) {
            Ok(v @ Value::Object(_)) => v,
            Ok(_) => return error(ErrorCode::BadRequest, "frame must be a JSON object"),
            Err(e) => return error(ErrorCode::BadRequest, format!("invalid JSON: {e}")),
        };
        match value.get("v").map(Value::as_u64) {
            None => return error(ErrorCode::BadRequest, "missing field `v`"),
            Some(Some(ENV_PROTOCOL_VERSION)) => {}
            Some(_) => {
                return error(
                    ErrorCode::UnsupportedVersion,
                    format!("only protocol version {ENV_PROTOCOL_VERSION} is supported"),
                )
            }
        }
        match value.get("type").and_then(Value::as_str) {
            Some("reset") => match serde_json::from_value(value) {
                Ok(req) => self.reset(req),
                Err(e) => error(ErrorCode::BadRequest, format!("reset: {e}")),
            },
            Some("step") => match serde_json::from_value(value) {
                Ok(req) => self.step(req),
                Err(e) => error(ErrorCode::BadRequest, format!("step: {e}")),
            },
            Some(other) => error(ErrorCode::BadRequest, format!("unknown frame type {other:?}")),
            None => error(ErrorCode::BadRequest, "missing field `type`"),
        }
    }

    fn reset(&mut self, req: ResetRequest) -> String {
        let profile = req.profile.unwrap_or_default();
        let reward = req.reward_params.unwrap_or_default();
        let max_steps = req.max_steps.unwrap_or(30);
        if max_steps == 0 {
            return error(ErrorCode::BadRequest, "max_steps must be at least 1");
        }
        if let Err(e) = reward.validate() {
            return error(ErrorCode::BadRequest, e.to_string());
        }
        let built = scene_task(req.seed, req.run, &profile)
            .map_err(|e| e.to_string())
            .and_then(|(house, task)| Ok((Site::new(house).map_err(|e| e.to_string())?, task)));
        let (site, task): (Arc<Site>, Task) = match built {
            Ok(x) => x,
            Err(e) => return error(ErrorCode::BadRequest, e),
        };
        self.next_id += 1;
        let id = format!("s{}", self.next_id);
        let snapshot = EnvSnapshot::start(site, &task);
        let prompt = serialize_observation(&snapshot, &task);
        let params = SessionParams {
            reward_params: reward,
            max_steps,
        };
        let resp = ResetResponse {
            v: ENV_PROTOCOL_VERSION,
            kind: "reset".into(),
            session: id.clone(),
            system: prompt.system,
            observation: prompt.user,
            task: task.clone(),
            params: params.clone(),
        };
        self.sessions.insert(
            id,
            Session {
                snapshot,
                task,
                params,
                steps_taken: 0,
                finished: false,
            },
        );
        to_canonical_json(&resp)
    }

    fn step(&mut self, req: StepRequest) -> String {
        let Some(session) = self.sessions.get_mut(&req.session) else {
            return error(ErrorCode::UnknownSession, format!("no session {:?}", req.session));
        };
        if session.finished {
            return error(ErrorCode::SessionFinished, format!("session {} is finished", req.session));
        }
        let parsed = parse_response(&req.response_text).map(|(_, a)| a);
        let (next, outcome) = execute(&parsed, &session.snapshot);
        let success = judge_success(&next, &outcome, &session.task.goal);
        let reward = match compute_reward(&outcome, success, &session.params.reward_params) {
            Ok(r) => r,
            Err(e) => return error(ErrorCode::BadRequest, e.to_string()),
        };
        session.steps_taken += 1;
        session.snapshot = next;
        let done = outcome.done_called || session.steps_taken >= session.params.max_steps;
        session.finished = done;
        let resp = StepResponse {
            v: ENV_PROTOCOL_VERSION,
            kind: "step".into(),
            session: req.session,
            observation: serialize_observation(&session.snapshot, &session.task).user,
            reward,
            outcome,
            done,
            success,
            steps_remaining: session.params.max_steps - session.steps_taken,
        };
        to_canonical_json(&resp)
    }
}

/// Serves one connection until EOF. A read error ends the connection and
/// with it every session it owned.
pub fn serve_stream<R: BufRead, W: Write>(reader: R, mut writer: W) -> io::Result<()> {
    let mut conn = Connection::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = conn.handle_line(&line);
        writer.write_all(resp.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
    }
    Ok(())
}

pub fn serve_stdio() -> io::Result<()> {
    let stdin = io::stdin();
    serve_stream(stdin.lock(), io::stdout().lock())
}

/// Accepts connections forever, one thread per connection.
pub fn serve_listener(listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        std::thread::spawn(move || {
            let peer = stream.peer_addr().ok();
            if let Err(e) = serve_tcp_stream(stream) {
                log::warn!("connection {peer:?} ended: {e}");
            }
        });
    }
    Ok(())
}

fn serve_tcp_stream(stream: TcpStream) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    serve_stream(reader, stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn reset_is_deterministic_across_sessions() {
        let mut c = Connection::new();
        let a = frame(&c.handle_line(r#"{"v":1,"type":"reset","seed":7}"#));
        let b = frame(&c.handle_line(r#"{"v":1,"type":"reset","seed":7}"#));
        assert_eq!(a["session"], "s1");
        assert_eq!(b["session"], "s2");
        assert_eq!(a["observation"], b["observation"]);
    }

    #[test]
    fn error_codes() {
        let mut c = Connection::new();
        let code = |c: &mut Connection, l: &str| frame(&c.handle_line(l))["code"].clone();
        assert_eq!(code(&mut c, "not json"), "bad_request");
        assert_eq!(code(&mut c, r#"{"type":"reset","seed":1}"#), "bad_request");
        assert_eq!(code(&mut c, r#"{"v":2,"type":"reset","seed":1}"#), "unsupported_version");
        assert_eq!(code(&mut c, r#"{"v":1,"type":"reset"}"#), "bad_request");
        assert_eq!(code(&mut c, r#"{"v":1,"type":"dance"}"#), "bad_request");
        assert_eq!(
            code(&mut c, r#"{"v":1,"type":"step","session":"s9","response_text":"done()"}"#),
            "unknown_session"
        );
        c.handle_line(r#"{"v":1,"type":"reset","seed":1}"#);
        let r = frame(&c.handle_line(r#"{"v":1,"type":"step","session":"s1","response_text":"Command:\ndone()"}"#));
        assert_eq!(r["done"], true);
        assert_eq!(
            code(&mut c, r#"{"v":1,"type":"step","session":"s1","response_text":"done()"}"#),
            "session_finished"
        );
    }

    #[test]
    fn budget_ends_session() {
        let mut c = Connection::new();
        c.handle_line(r#"{"v":1,"type":"reset","seed":3,"max_steps":2}"#);
        let step = r#"{"v":1,"type":"step","session":"s1","response_text":"hmm"}"#;
        let first = frame(&c.handle_line(step));
        assert_eq!(first["done"], false);
        assert_eq!(first["reward"]["total"].as_f64().unwrap(), -0.4);
        let second = frame(&c.handle_line(step));
        assert_eq!(second["done"], true);
        assert_eq!(second["steps_remaining"], 0);
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let mut c = Connection::new();
        let r = frame(&c.handle_line(r#"{"v":1,"type":"reset","seed":7,"colour":"blue"}"#));
        assert_eq!(r["type"], "reset");
    }
}
