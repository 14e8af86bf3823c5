//! Byte transports between an adapter and an endpoint.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use super::a2a::A2aMock;
use super::mcp::McpMock;

/// One request/response round trip. A request may be written in several
/// chunks; the response is whatever the endpoint produced for it.
pub trait Wire {
    fn exchange(&mut self, chunks: &[&[u8]]) -> io::Result<Vec<u8>>;
}

/// In-process MCP endpoint: each chunk is one read on the server side.
pub struct McpMockWire(pub McpMock);

impl Wire for McpMockWire {
    fn exchange(&mut self, chunks: &[&[u8]]) -> io::Result<Vec<u8>> {
        let mut out = Vec::new();
        for c in chunks {
            out.extend(self.0.feed(c));
        }
        Ok(out)
    }
}

/// In-process A2A endpoint: the chunks form one HTTP request.
pub struct A2aMockWire(pub A2aMock);

impl Wire for A2aMockWire {
    fn exchange(&mut self, chunks: &[&[u8]]) -> io::Result<Vec<u8>> {
        Ok(self.0.handle(&chunks.concat()))
    }
}

/// Newline-delimited stream over TCP. A missing response line surfaces as
/// an empty reply after `timeout`.
pub struct NdjsonTcp {
    writer: TcpStream,
    reader: BufReader<TcpStream>,
}

impl NdjsonTcp {
    pub fn connect(addr: impl ToSocketAddrs, timeout: Duration) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(timeout))?;
        Ok(NdjsonTcp {
            reader: BufReader::new(stream.try_clone()?),
            writer: stream,
        })
    }
}

impl Wire for NdjsonTcp {
    fn exchange(&mut self, chunks: &[&[u8]]) -> io::Result<Vec<u8>> {
        for (i, c) in chunks.iter().enumerate() {
            if i > 0 {
                std::thread::sleep(Duration::from_millis(20));
            }
            self.writer.write_all(c)?;
            self.writer.flush()?;
        }
        let mut out = Vec::new();
        loop {
            let mut line = Vec::new();
            match self.reader.read_until(b'\n', &mut line) {
                Ok(0) => break,
                Ok(_) => {
                    out.extend(line);
                    // A split request may draw one reply per fragment.
                    if chunks.len() == 1 {
                        break;
                    }
                }
                Err(e) if matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut) => break,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

/// One HTTP/1.1 request per connection.
pub struct HttpTcp {
    pub addr: String,
    pub timeout: Duration,
}

impl Wire for HttpTcp {
    fn exchange(&mut self, chunks: &[&[u8]]) -> io::Result<Vec<u8>> {
        let mut stream = TcpStream::connect(&self.addr)?;
        stream.set_read_timeout(Some(self.timeout))?;
        for c in chunks {
            stream.write_all(c)?;
        }
        stream.flush()?;
        let mut out = Vec::new();
        stream.read_to_end(&mut out)?;
        Ok(out)
    }
}
