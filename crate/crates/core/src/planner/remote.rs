use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{PlanContext, Planner, PlannerError};

pub const PROTOCOL_VERSION: u32 = 1;

/// One request line sent to an external planner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub v: u32,
    #[serde(rename = "type")]
    pub kind: String,
    pub system: String,
    pub user: String,
}

/// One response line. Unknown fields are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanResponse {
    pub v: u32,
    #[serde(rename = "type")]
    pub kind: String,
    pub text: String,
}

struct Conn {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

/// Client for a planner served as line-delimited JSON over TCP.
///
/// A broken connection is re-established once per step; a second failure is
/// a transport error. A read timeout drops the connection so a late answer
/// cannot be mistaken for the next one.
pub struct RemotePlanner {
    addr: String,
    timeout: Duration,
    conn: Option<Conn>,
    transcript: Option<Vec<String>>,
}

impl RemotePlanner {
    pub fn new(addr: String) -> Self {
        RemotePlanner {
            addr,
            timeout: Duration::from_secs(60),
            conn: None,
            transcript: None,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Keeps every line sent (`> `) and received (`< `).
    pub fn recording(mut self) -> Self {
        self.transcript = Some(Vec::new());
        self
    }

    pub fn transcript(&self) -> &[String] {
        self.transcript.as_deref().unwrap_or(&[])
    }

    fn connect(&self) -> Result<Conn, String> {
        let addrs = self
            .addr
            .to_socket_addrs()
            .map_err(|e| format!("{}: {e}", self.addr))?;
        let mut last = format!("{}: no addresses", self.addr);
        for a in addrs {
            match TcpStream::connect_timeout(&a, self.timeout) {
                Ok(stream) => {
                    stream
                        .set_read_timeout(Some(self.timeout))
                        .map_err(|e| e.to_string())?;
                    let _ = stream.set_nodelay(true);
                    let writer = stream.try_clone().map_err(|e| e.to_string())?;
                    return Ok(Conn {
                        reader: BufReader::new(stream),
                        writer,
                    });
                }
                Err(e) => last = format!("{a}: {e}"),
            }
        }
        Err(last)
    }

    fn exchange(&mut self, line: &str) -> Result<String, Attempt> {
        if self.conn.is_none() {
            self.conn = Some(self.connect().map_err(Attempt::Retry)?);
        }
        let conn = self.conn.as_mut().expect("connected");
        conn.writer
            .write_all(line.as_bytes())
            .and_then(|_| conn.writer.flush())
            .map_err(|e| Attempt::Retry(e.to_string()))?;
        let mut reply = String::new();
        match conn.reader.read_line(&mut reply) {
            Ok(0) => Err(Attempt::Retry("connection closed".into())),
            Ok(_) => Ok(reply),
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                Err(Attempt::Timeout)
            }
            Err(e) => Err(Attempt::Retry(e.to_string())),
        }
    }
}

enum Attempt {
    Retry(String),
    Timeout,
}

impl Planner for RemotePlanner {
    fn name(&self) -> String {
        format!("remote:{}", self.addr)
    }

    fn respond(&mut self, ctx: &PlanContext<'_>) -> Result<String, PlannerError> {
        let request = PlanRequest {
            v: PROTOCOL_VERSION,
            kind: "plan".into(),
            system: ctx.prompt.system.clone(),
            user: ctx.prompt.user.clone(),
        };
        let mut line = serde_json::to_string(&request).expect("request serializes");
        line.push('\n');
        let mut last = String::new();
        for _ in 0..2 {
            if let Some(t) = self.transcript.as_mut() {
                t.push(format!("> {}", line.trim_end()));
            }
            match self.exchange(&line) {
                Ok(reply) => {
                    if let Some(t) = self.transcript.as_mut() {
                        t.push(format!("< {}", reply.trim_end()));
                    }
                    let resp: PlanResponse = serde_json::from_str(reply.trim_end())
                        .map_err(|e| PlannerError::Transport(format!("bad response frame: {e}")))?;
                    if resp.v != PROTOCOL_VERSION || resp.kind != "response" {
                        return Err(PlannerError::Transport(format!(
                            "unexpected frame v={} type={}",
                            resp.v, resp.kind
                        )));
                    }
                    return Ok(resp.text);
                }
                Err(Attempt::Timeout) => {
                    self.conn = None;
                    return Err(PlannerError::Timeout);
                }
                Err(Attempt::Retry(e)) => {
                    log::warn!("remote planner {}: {e}", self.addr);
                    self.conn = None;
                    last = e;
                }
            }
        }
        Err(PlannerError::Transport(last))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_field_order_is_fixed() {
        let r = PlanRequest {
            v: 1,
            kind: "plan".into(),
            system: "s".into(),
            user: "u".into(),
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"v":1,"type":"plan","system":"s","user":"u"}"#
        );
        let resp: PlanResponse =
            serde_json::from_str(r#"{"v":1,"type":"response","text":"done()","extra":3}"#).unwrap();
        assert_eq!(resp.text, "done()");
    }
}
