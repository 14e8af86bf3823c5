//! A2A mock agent (HTTP/1.1 + JSON) and the matching client driver.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value as Json};

use super::oracle::Oracle;
use super::wire::Wire;
use super::{Exchange, Profile, Status, TestCase, TestStep};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TaskState {
    InputRequired,
    Working,
    Completed,
    Canceled,
    Failed,
}

impl TaskState {
    fn as_str(self) -> &'static str {
        match self {
            TaskState::InputRequired => "input-required",
            TaskState::Working => "working",
            TaskState::Completed => "completed",
            TaskState::Canceled => "canceled",
            TaskState::Failed => "failed",
        }
    }
}

#[derive(Debug)]
struct Task {
    agent: String,
    state: TaskState,
    token: String,
}

const AGENTS: [(&str, &str); 2] = [("a1", "c1"), ("a2", "c2")];

/// In-process A2A agent.
///
/// The vulnerable profile lets an agent pass on capabilities it only
/// received, keeps task credentials valid after cancel or failure, serves an
/// unsigned agent card, logs nothing and starts work without consent. The
/// hardened profile closes each of those gaps; a task without consent waits
/// in `input-required` until the agent's consent arrives.
#[derive(Debug)]
pub struct A2aMock {
    profile: Profile,
    tasks: BTreeMap<String, Task>,
    revoked: BTreeSet<String>,
    delegation: BTreeMap<(String, String), BTreeSet<String>>,
    consent: BTreeSet<String>,
    audit: Vec<String>,
}

pub struct Response {
    pub code: u16,
    pub body: Json,
}

fn respond(code: u16, body: Json) -> Response {
    Response { code, body }
}

fn reason(code: u16) -> &'static str {
    match code {
        200 => "OK",
        201 => "Created",
        400 => "Bad Request",
        401 => "Unauthorized",
        403 => "Forbidden",
        404 => "Not Found",
        409 => "Conflict",
        _ => "Error",
    }
}

impl A2aMock {
    pub fn new(profile: Profile) -> Self {
        A2aMock {
            profile,
            tasks: BTreeMap::new(),
            revoked: BTreeSet::new(),
            delegation: BTreeMap::new(),
            consent: BTreeSet::new(),
            audit: Vec::new(),
        }
    }

    fn hardened(&self) -> bool {
        self.profile == Profile::Hardened
    }

    /// Parses one raw HTTP request and returns the raw response.
    pub fn handle(&mut self, raw: &[u8]) -> Vec<u8> {
        let r = match parse_request(raw) {
            Ok((method, path, body)) => self.route(&method, &path, &body),
            Err(e) => respond(400, json!({ "error": e })),
        };
        let body = r.body.to_string();
        format!(
            "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            r.code,
            reason(r.code),
            body.len(),
            body
        )
        .into_bytes()
    }

    fn original(agent: &str) -> Option<&'static str> {
        AGENTS.iter().find(|(a, _)| *a == agent).map(|(_, c)| *c)
    }

    fn received(&self, agent: &str) -> BTreeSet<String> {
        self.delegation
            .iter()
            .filter(|((_, to), _)| to == agent)
            .flat_map(|(_, caps)| caps.iter().cloned())
            .collect()
    }

    pub fn route(&mut self, method: &str, path: &str, body: &Json) -> Response {
        let (path, query) = path.split_once('?').unwrap_or((path, ""));
        let segs: Vec<&str> = path.trim_matches('/').split('/').collect();
        if segs.first() != Some(&"_harness") && segs.first() != Some(&"audit") && self.hardened() {
            self.audit.push(format!("{method} {path}"));
        }
        let field = |k: &str| body.get(k).and_then(Json::as_str).unwrap_or("").to_string();
        match (method, segs.as_slice()) {
            ("GET", [".well-known", "agent-card"]) => {
                let agent = query.strip_prefix("agent=").unwrap_or("a1");
                let Some(cap) = Self::original(agent) else {
                    return respond(404, json!({"error": "unknown agent"}));
                };
                let mut card = json!({"name": agent, "url": format!("/agents/{agent}"), "capabilities": [cap]});
                if self.hardened() {
                    card["signature"] = json!(format!("signed:mock-ca:{agent}"));
                }
                respond(200, card)
            }
            ("GET", ["audit"]) => respond(200, json!({ "entries": self.audit })),
            ("POST", ["tasks"]) => self.send_task(&field("agent"), &field("session"), body.get("token")),
            ("POST", ["tasks", id, "delegate"]) => {
                self.delegate(id, &field("from"), &field("to"), &field("capability"))
            }
            ("POST", ["tasks", _, "consent"]) => {
                let agent = field("agent");
                if Self::original(&agent).is_none() {
                    return respond(400, json!({"error": "unknown agent"}));
                }
                self.consent.insert(agent.clone());
                for t in self.tasks.values_mut() {
                    if t.agent == agent && t.state == TaskState::InputRequired {
                        t.state = TaskState::Working;
                    }
                }
                respond(200, json!({ "consent": agent }))
            }
            ("POST", ["tasks", id, "cancel"]) => self.finish(id, TaskState::Canceled),
            ("POST", ["_harness", "complete", id]) => self.finish(id, TaskState::Completed),
            ("POST", ["_harness", "fail", id]) => self.finish(id, TaskState::Failed),
            _ => respond(404, json!({"error": "no such route"})),
        }
    }

    fn send_task(&mut self, agent: &str, session: &str, token: Option<&Json>) -> Response {
        if let Some(token) = token.and_then(Json::as_str) {
            let Some((id, task)) = self.tasks.iter().find(|(_, t)| t.token == token) else {
                return respond(401, json!({"error": "unknown credentials"}));
            };
            if self.revoked.contains(token) {
                return respond(401, json!({"error": "credentials revoked"}));
            }
            return respond(200, json!({"id": id, "state": task.state.as_str()}));
        }
        if Self::original(agent).is_none() {
            return respond(400, json!({"error": "unknown agent"}));
        }
        let state = if self.hardened() && !self.consent.contains(agent) {
            TaskState::InputRequired
        } else {
            TaskState::Working
        };
        let n = self.tasks.len() + 1;
        let id = format!("task-{n}");
        let token = format!("cred-{n}");
        self.tasks.insert(
            id.clone(),
            Task {
                agent: agent.to_string(),
                state,
                token: token.clone(),
            },
        );
        respond(
            201,
            json!({"id": id, "session": session, "state": state.as_str(), "token": token}),
        )
    }

    fn delegate(&mut self, task: &str, from: &str, to: &str, cap: &str) -> Response {
        if self.hardened() && self.tasks.get(task).is_some_and(|t| t.state == TaskState::Failed) {
            return respond(409, json!({"error": "task failed"}));
        }
        if Self::original(from).is_none() || Self::original(to).is_none() || from == to {
            return respond(400, json!({"error": "bad delegation"}));
        }
        let granted = Self::original(from) == Some(cap);
        let held = granted || self.received(from).contains(cap);
        if !(granted || (held && !self.hardened())) {
            return respond(403, json!({"error": "capability not granted"}));
        }
        let set = self.delegation.entry((from.to_string(), to.to_string())).or_default();
        set.insert(cap.to_string());
        let caps: Vec<&String> = set.iter().collect();
        respond(200, json!({"from": from, "to": to, "delegated": caps}))
    }

    fn finish(&mut self, id: &str, next: TaskState) -> Response {
        let hardened = self.hardened();
        let Some(task) = self.tasks.get_mut(id) else {
            return respond(404, json!({"error": "unknown task"}));
        };
        if !matches!(task.state, TaskState::Working | TaskState::InputRequired) {
            return respond(409, json!({"error": "task not working"}));
        }
        task.state = next;
        if hardened && next != TaskState::Completed {
            self.revoked.insert(task.token.clone());
        }
        respond(200, json!({"id": id, "agent": task.agent, "state": next.as_str()}))
    }
}

fn parse_request(raw: &[u8]) -> Result<(String, String, Json), String> {
    let mut headers = [httparse::EMPTY_HEADER; 32];
    let mut req = httparse::Request::new(&mut headers);
    let start = match req.parse(raw).map_err(|e| e.to_string())? {
        httparse::Status::Complete(n) => n,
        httparse::Status::Partial => return Err("incomplete request".into()),
    };
    let body = &raw[start..];
    let json = if body.iter().all(u8::is_ascii_whitespace) {
        Json::Null
    } else {
        serde_json::from_slice(body).map_err(|e| e.to_string())?
    };
    Ok((
        req.method.unwrap_or("").to_string(),
        req.path.unwrap_or("").to_string(),
        json,
    ))
}

/// Length of a complete request in `buf` (headers plus declared body), if
/// one has arrived.
pub fn request_len(buf: &[u8]) -> Option<usize> {
    let mut headers = [httparse::EMPTY_HEADER; 32];
    let mut req = httparse::Request::new(&mut headers);
    let httparse::Status::Complete(n) = req.parse(buf).ok()? else {
        return None;
    };
    let body = req
        .headers
        .iter()
        .find(|h| h.name.eq_ignore_ascii_case("content-length"))
        .and_then(|h| std::str::from_utf8(h.value).ok()?.trim().parse::<usize>().ok())
        .unwrap_or(0);
    (buf.len() >= n + body).then_some(n + body)
}

/// Status code and JSON body of a raw HTTP response.
pub fn parse_response(raw: &[u8]) -> Option<(u16, Json)> {
    let mut headers = [httparse::EMPTY_HEADER; 32];
    let mut resp = httparse::Response::new(&mut headers);
    let httparse::Status::Complete(n) = resp.parse(raw).ok()? else {
        return None;
    };
    let body = serde_json::from_slice(&raw[n..]).unwrap_or(Json::Null);
    Some((resp.code?, body))
}

pub fn status_of(raw: &[u8]) -> Status {
    if raw.is_empty() {
        return Status::Silent;
    }
    match parse_response(raw) {
        Some((code, _)) if (200..300).contains(&code) => Status::Accepted,
        Some((code, _)) => Status::Rejected(i64::from(code)),
        None => Status::Malformed,
    }
}

fn http(method: &str, path: &str, body: Option<&Json>) -> String {
    match body {
        Some(b) => {
            let b = b.to_string();
            format!(
                "{method} {path} HTTP/1.1\r\nHost: mock-a2a\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{b}",
                b.len()
            )
        }
        None => format!("{method} {path} HTTP/1.1\r\nHost: mock-a2a\r\n\r\n"),
    }
}

/// Client side of the A2A adapter.
pub struct A2aDriver<W: Wire> {
    wire: W,
    tasks: BTreeMap<String, (String, String)>,
    last_task: Option<String>,
}

impl<W: Wire> A2aDriver<W> {
    pub fn new(wire: W) -> Self {
        A2aDriver {
            wire,
            tasks: BTreeMap::new(),
            last_task: None,
        }
    }

    fn task_id(&self, session: Option<&str>) -> String {
        session
            .and_then(|s| self.tasks.get(s))
            .map(|(id, _)| id.clone())
            .or_else(|| self.last_task.clone())
            .unwrap_or_else(|| "ctx".to_string())
    }

    fn send(&mut self, transition: &str, operation: &str, method: &str, path: &str, body: Option<Json>) -> Exchange {
        let request = http(method, path, body.as_ref());
        let mut ex = Exchange::new(transition, operation, &request);
        match self.wire.exchange(&[request.as_bytes()]) {
            Ok(resp) => {
                ex.status = status_of(&resp);
                ex.response = String::from_utf8_lossy(&resp).to_string();
            }
            Err(e) => ex.error = Some(e.to_string()),
        }
        ex
    }

    pub fn perform(&mut self, step: &TestStep) -> Exchange {
        let tr = step.transition.as_str();
        let op = step.operation.as_str();
        let s = step.param("s");
        let agent = step.param("a").unwrap_or("a1").to_string();
        match op {
            "discover_agent" => self.send(tr, op, "GET", &format!("/.well-known/agent-card?agent={agent}"), None),
            "send_task" => {
                let ex = self.send(tr, op, "POST", "/tasks", Some(json!({"agent": agent, "session": s})));
                if let (Some(s), Some((_, body))) = (s, parse_response(ex.response.as_bytes())) {
                    if let (Some(id), Some(tok)) = (body["id"].as_str(), body["token"].as_str()) {
                        self.tasks.insert(s.to_string(), (id.to_string(), tok.to_string()));
                        self.last_task = Some(id.to_string());
                    }
                }
                ex
            }
            "delegate" | "redelegate" => {
                let body = json!({
                    "from": step.param("from"),
                    "to": step.param("to"),
                    "capability": step.param("c"),
                });
                let path = format!("/tasks/{}/delegate", self.task_id(None));
                self.send(tr, op, "POST", &path, Some(body))
            }
            "consent_prompt" => {
                let path = format!("/tasks/{}/consent", self.task_id(None));
                self.send(tr, op, "POST", &path, Some(json!({ "agent": agent })))
            }
            "cancel" => {
                let path = format!("/tasks/{}/cancel", self.task_id(s));
                self.send(tr, op, "POST", &path, None)
            }
            "complete_task" => {
                let path = format!("/_harness/complete/{}", self.task_id(s));
                self.send(tr, op, "POST", &path, None)
            }
            "task_error" => {
                let path = format!("/_harness/fail/{}", self.task_id(s));
                self.send(tr, op, "POST", &path, None)
            }
            other => {
                let mut ex = Exchange::new(tr, other, "");
                ex.error = Some(format!("no A2A operation `{other}`"));
                ex
            }
        }
    }

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
            Oracle::CredentialRevoked => {
                let tokens: Vec<String> = sessions("cancel")
                    .iter()
                    .filter_map(|s| self.tasks.get(s).map(|(_, tok)| tok.clone()))
                    .collect();
                tokens
                    .iter()
                    .map(|tok| self.send("probe", "reuse_credential", "POST", "/tasks", Some(json!({ "token": tok }))))
                    .collect()
            }
            Oracle::FailSecure => {
                let failed: Vec<(String, String)> = test
                    .steps
                    .iter()
                    .filter(|s| s.operation == "task_error")
                    .filter_map(|st| {
                        let s = st.param("s")?;
                        let agent = test.steps.iter().find(|x| x.operation == "send_task" && x.param("s") == Some(s))?.param("a")?;
                        Some((self.tasks.get(s)?.0.clone(), agent.to_string()))
                    })
                    .collect();
                failed
                    .iter()
                    .map(|(id, agent)| {
                        let (to, cap) = if agent == "a1" { ("a2", "c1") } else { ("a1", "c2") };
                        let body = json!({"from": agent, "to": to, "capability": cap});
                        self.send("probe", "delegate", "POST", &format!("/tasks/{id}/delegate"), Some(body))
                    })
                    .collect()
            }
            Oracle::AuditComplete => vec![self.send("probe", "audit", "GET", "/audit", None)],
            Oracle::ManifestAttested => {
                let agents: BTreeSet<String> = test
                    .steps
                    .iter()
                    .filter_map(|s| s.param("a").map(str::to_string))
                    .collect();
                agents
                    .iter()
                    .map(|a| {
                        self.send("probe", "discover_agent", "GET", &format!("/.well-known/agent-card?agent={a}"), None)
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}
