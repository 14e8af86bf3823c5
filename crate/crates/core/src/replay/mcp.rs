//! MCP mock server (newline-delimited JSON-RPC 2.0) and the client-side
//! driver that turns test steps into requests.

use std::collections::BTreeMap;

use serde_json::{json, Value as Json};

use super::oracle::Oracle;
use super::wire::Wire;
use super::{Exchange, Profile, Status, TestCase, TestStep, DIRECTIVE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SessionState {
    Open,
    Closed,
    Revoked,
    Undefined,
}

enum Reply {
    Result(Json),
    Error(i64, &'static str),
    Silent,
}

pub const UNAUTHENTICATED: i64 = -32001;
pub const REVOKED: i64 = -32002;
pub const CONSENT_REQUIRED: i64 = -32003;

const TOOLS: [&str; 2] = ["t1", "t2"];

/// In-process MCP server.
///
/// The vulnerable profile frames messages by read boundary, keeps tokens
/// valid after close, echoes tool output verbatim, lists tools without
/// attestation, keeps no audit log and drops sessions on shutdown without a
/// defined state. The hardened profile does the opposite on each count and
/// refuses tool execution without explicit consent.
#[derive(Debug)]
pub struct McpMock {
    profile: Profile,
    buffer: Vec<u8>,
    sessions: BTreeMap<String, SessionState>,
    issued: u32,
    poisoned: BTreeMap<String, String>,
    audit: Vec<String>,
}

impl McpMock {
    pub fn new(profile: Profile) -> Self {
        McpMock {
            profile,
            buffer: Vec::new(),
            sessions: BTreeMap::new(),
            issued: 0,
            poisoned: BTreeMap::new(),
            audit: Vec::new(),
        }
    }

    fn hardened(&self) -> bool {
        self.profile == Profile::Hardened
    }

    /// Consumes one read's worth of bytes and returns the bytes written back.
    pub fn feed(&mut self, chunk: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        if self.hardened() {
            self.buffer.extend_from_slice(chunk);
            while let Some(pos) = self.buffer.iter().position(|b| *b == b'\n') {
                let line: Vec<u8> = self.buffer.drain(..=pos).collect();
                self.line(&line[..pos], &mut out);
            }
        } else {
            let line = chunk.strip_suffix(b"\n").unwrap_or(chunk);
            self.line(line, &mut out);
        }
        out
    }

    fn line(&mut self, line: &[u8], out: &mut Vec<u8>) {
        if line.iter().all(u8::is_ascii_whitespace) {
            return;
        }
        let response = match serde_json::from_slice::<Json>(line) {
            Err(_) => Some(error(Json::Null, -32700, "parse error")),
            Ok(msg) => self.message(&msg),
        };
        if let Some(r) = response {
            out.extend(r.to_string().into_bytes());
            out.push(b'\n');
        }
    }

    fn message(&mut self, msg: &Json) -> Option<Json> {
        let id = msg.get("id").cloned();
        let method = msg.get("method").and_then(Json::as_str);
        let (Some(method), Some("2.0")) = (method, msg.get("jsonrpc").and_then(Json::as_str)) else {
            return Some(error(id.unwrap_or(Json::Null), -32600, "invalid request"));
        };
        let params = msg.get("params").cloned().unwrap_or(Json::Null);
        if self.hardened() && method != "audit/list" {
            let who = params.get("token").and_then(Json::as_str).unwrap_or("-");
            self.audit.push(format!("{method} {who}"));
        }
        let reply = self.dispatch(method, &params);
        let id = id?;
        match reply {
            Reply::Result(r) => Some(json!({"jsonrpc": "2.0", "id": id, "result": r})),
            Reply::Error(code, m) => Some(error(id, code, m)),
            Reply::Silent => None,
        }
    }

    fn auth(&self, params: &Json) -> Result<String, Reply> {
        let token = params
            .get("token")
            .and_then(Json::as_str)
            .ok_or(Reply::Error(UNAUTHENTICATED, "missing credentials"))?;
        match (self.sessions.get(token), self.hardened()) {
            (None, _) => Err(Reply::Error(UNAUTHENTICATED, "unknown credentials")),
            (Some(SessionState::Open), _) => Ok(token.to_string()),
            (Some(SessionState::Closed), false) => Ok(token.to_string()),
            (Some(SessionState::Undefined), false) => Err(Reply::Silent),
            (Some(_), _) => Err(Reply::Error(REVOKED, "credentials revoked")),
        }
    }

    fn render(&self, text: &str) -> String {
        if self.hardened() {
            text.replace("SYSTEM:", "[untrusted]").replace("ignore previous instructions", "[removed]")
        } else {
            text.to_string()
        }
    }

    fn dispatch(&mut self, method: &str, params: &Json) -> Reply {
        let result = match method {
            "initialize" => {
                self.issued += 1;
                let token = format!("tok-{}", self.issued);
                self.sessions.insert(token.clone(), SessionState::Open);
                json!({
                    "protocolVersion": "2025-03-26",
                    "serverInfo": {"name": "mock-mcp", "profile": self.profile.as_str()},
                    "sessionToken": token,
                })
            }
            "ping" => json!({}),
            "tools/list" => {
                if let Err(r) = self.auth(params) {
                    return r;
                }
                let tools: Vec<Json> = TOOLS
                    .iter()
                    .map(|t| {
                        let mut tool = json!({"name": t, "description": format!("mock tool {t}")});
                        if self.hardened() {
                            tool["attestation"] = json!(format!("signed:mock-registry:{t}"));
                        }
                        tool
                    })
                    .collect();
                json!({ "tools": tools })
            }
            "tools/call" => {
                let name = params.get("name").and_then(Json::as_str).unwrap_or("");
                let args = params.get("arguments").cloned().unwrap_or(Json::Null);
                if name == "echo" {
                    let target = args.get("target").and_then(Json::as_str).unwrap_or("");
                    let text = args.get("text").and_then(Json::as_str).unwrap_or("");
                    self.poisoned.insert(target.to_string(), text.to_string());
                    return Reply::Result(json!({"content": [{"type": "text", "text": self.render(text)}]}));
                }
                if let Err(r) = self.auth(params) {
                    return r;
                }
                if !TOOLS.contains(&name) {
                    return Reply::Error(-32602, "unknown tool");
                }
                if self.hardened() && args.get("consent") != Some(&Json::Bool(true)) {
                    return Reply::Error(CONSENT_REQUIRED, "user consent required");
                }
                let mut text = format!("{name} completed");
                if let Some(p) = self.poisoned.get(name) {
                    text.push('\n');
                    text.push_str(p);
                }
                json!({"content": [{"type": "text", "text": self.render(&text)}]})
            }
            "session/close" => {
                let token = match self.auth(params) {
                    Ok(t) => t,
                    Err(r) => return r,
                };
                let next = if self.hardened() {
                    SessionState::Revoked
                } else {
                    SessionState::Closed
                };
                self.sessions.insert(token, next);
                json!({})
            }
            "shutdown" => {
                let token = match self.auth(params) {
                    Ok(t) => t,
                    Err(r) => return r,
                };
                if self.hardened() {
                    self.sessions.insert(token, SessionState::Revoked);
                    json!({})
                } else {
                    self.sessions.insert(token, SessionState::Undefined);
                    return Reply::Silent;
                }
            }
            "audit/list" => json!({ "entries": self.audit }),
            _ => return Reply::Error(-32601, "method not found"),
        };
        Reply::Result(result)
    }
}

fn error(id: Json, code: i64, message: &str) -> Json {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message}})
}

/// Classifies the reply lines of one exchange.
pub fn status_of(response: &[u8], id: u64) -> Status {
    let text = String::from_utf8_lossy(response);
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    match lines.as_slice() {
        [] => Status::Silent,
        [one] => match serde_json::from_str::<Json>(one) {
            Ok(r) if r.get("id") == Some(&json!(id)) && r.get("result").is_some() => Status::Accepted,
            Ok(r) if r.get("id") == Some(&json!(id)) => Status::Rejected(
                r.pointer("/error/code").and_then(Json::as_i64).unwrap_or(0),
            ),
            _ => Status::Malformed,
        },
        _ => Status::Malformed,
    }
}

/// Client side of the MCP adapter.
pub struct McpDriver<W: Wire> {
    wire: W,
    next_id: u64,
    tokens: BTreeMap<String, String>,
}

impl<W: Wire> McpDriver<W> {
    pub fn new(wire: W) -> Self {
        McpDriver {
            wire,
            next_id: 0,
            tokens: BTreeMap::new(),
        }
    }

    fn token(&self, session: Option<&str>) -> Json {
        session
            .and_then(|s| self.tokens.get(s))
            .map(|t| json!(t))
            .unwrap_or(Json::Null)
    }

    fn request(&mut self, method: &str, params: Json) -> (u64, String) {
        self.next_id += 1;
        let msg = json!({"jsonrpc": "2.0", "id": self.next_id, "method": method, "params": params});
        (self.next_id, format!("{msg}\n"))
    }

    fn send(&mut self, transition: &str, operation: &str, method: &str, params: Json, split: bool) -> Exchange {
        let (id, line) = self.request(method, params);
        let bytes = line.as_bytes();
        let chunks: Vec<&[u8]> = if split {
            let mid = bytes.len() / 2;
            vec![&bytes[..mid], &bytes[mid..]]
        } else {
            vec![bytes]
        };
        let mut ex = Exchange::new(transition, operation, line.trim_end());
        match self.wire.exchange(&chunks) {
            Ok(resp) => {
                ex.status = status_of(&resp, id);
                ex.response = String::from_utf8_lossy(&resp).trim_end().to_string();
            }
            Err(e) => ex.error = Some(e.to_string()),
        }
        ex
    }

    pub fn perform(&mut self, step: &TestStep) -> Exchange {
        let s = step.param("s");
        let tok = self.token(s);
        let t = step.param("t").unwrap_or("t1").to_string();
        let tr = step.transition.as_str();
        let op = step.operation.as_str();
        match op {
            "initialize" => {
                let ex = self.send(tr, op, "initialize", json!({"session": s}), false);
                if let (Some(s), Ok(r)) = (s, serde_json::from_str::<Json>(&ex.response)) {
                    if let Some(tok) = r.pointer("/result/sessionToken").and_then(Json::as_str) {
                        self.tokens.insert(s.to_string(), tok.to_string());
                    }
                }
                ex
            }
            "tools/list" | "reuse_credential" => self.send(tr, op, "tools/list", json!({"token": tok}), false),
            "tools/call" => self.send(
                tr,
                op,
                "tools/call",
                json!({"token": tok, "name": t, "arguments": {}}),
                false,
            ),
            "inject_output" => self.send(
                tr,
                op,
                "tools/call",
                json!({"name": "echo", "arguments": {"target": t, "text": DIRECTIVE}}),
                false,
            ),
            "close_session" => self.send(tr, op, "session/close", json!({"token": tok}), false),
            "shutdown" => self.send(tr, op, "shutdown", json!({"token": tok}), false),
            "split_write" => self.send(tr, op, "ping", json!({}), true),
            "unauthenticated_request" => self.send(tr, op, "tools/list", json!({}), false),
            other => {
                let mut ex = Exchange::new(tr, other, "");
                ex.error = Some(format!("no MCP operation `{other}`"));
                ex
            }
        }
    }

    /// Extra requests the oracle needs after the trace has run.
    pub fn probe(&mut self, test: &TestCase) -> Vec<Exchange> {
        let sessions = |op: &str| -> Vec<String> {
            let mut out: Vec<String> = test
                .steps
                .iter()
                .filter(|s| s.operation == op)
                .filter_map(|s| s.param("s").map(str::to_string))
                .collect();
            out.dedup();
            out
        };
        match test.oracle {
            Oracle::CredentialRevoked => sessions("close_session")
                .iter()
                .map(|s| {
                    let tok = self.token(Some(s));
                    self.send("probe", "reuse_credential", "tools/list", json!({"token": tok}), false)
                })
                .collect(),
            Oracle::LifecycleDefined => sessions("shutdown")
                .iter()
                .map(|s| {
                    let tok = self.token(Some(s));
                    self.send("probe", "tools/list", "tools/list", json!({"token": tok}), false)
                })
                .collect(),
            Oracle::AuditComplete => vec![self.send("probe", "audit/list", "audit/list", json!({}), false)],
            Oracle::ManifestAttested => {
                let init = self.send("probe", "initialize", "initialize", json!({"session": "probe"}), false);
                let tok = serde_json::from_str::<Json>(&init.response)
                    .ok()
                    .and_then(|r| r.pointer("/result/sessionToken").cloned())
                    .unwrap_or(Json::Null);
                let list = self.send("probe", "tools/list", "tools/list", json!({"token": tok}), false);
                vec![init, list]
            }
            _ => Vec::new(),
        }
    }
}
