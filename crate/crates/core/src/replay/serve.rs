//! Serves a mock profile over TCP so live mode has something to talk to.

use std::io::{self, Read, Write};
use std::net::TcpListener;

use super::a2a::{request_len, A2aMock};
use super::mcp::McpMock;
use super::{Profile, ReplayError};

/// Accepts connections one at a time until `max_connections` have been
/// served (forever when `None`). State persists across connections.
///
/// MCP connections are byte streams; every read is handed to the mock as is,
/// so the vulnerable profile sees the peer's write boundaries. A2A
/// connections carry one HTTP request each.
pub fn serve(
    protocol: &str,
    profile: Profile,
    listener: TcpListener,
    max_connections: Option<usize>,
) -> Result<(), ReplayError> {
    let io_err = |e: io::Error| ReplayError::Transport(e.to_string());
    let mut mcp = McpMock::new(profile);
    let mut a2a = A2aMock::new(profile);
    if !matches!(protocol, "mcp" | "a2a") {
        return Err(ReplayError::Unsupported(protocol.to_string()));
    }
    for (served, stream) in listener.incoming().enumerate() {
        let mut stream = stream.map_err(io_err)?;
        let mut buf = [0u8; 8192];
        if protocol == "mcp" {
            loop {
                let n = match stream.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => n,
                };
                let out = mcp.feed(&buf[..n]);
                if !out.is_empty() && stream.write_all(&out).is_err() {
                    break;
                }
            }
        } else {
            let mut req = Vec::new();
            loop {
                if request_len(&req).is_some() {
                    break;
                }
                match stream.read(&mut buf) {
                    Ok(0) | Err(_) => break,
                    Ok(n) => req.extend_from_slice(&buf[..n]),
                }
            }
            let _ = stream.write_all(&a2a.handle(&req));
        }
        if max_connections.is_some_and(|m| served + 1 >= m) {
            break;
        }
    }
    Ok(())
}
