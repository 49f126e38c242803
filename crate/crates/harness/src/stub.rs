//! A reference transducer speaking the wire protocol, for tests and demos.

use std::io::{BufRead, Write};
use std::sync::Arc;
use std::thread::JoinHandle;

use transduce::{canonical_derive, Grammar, ParsePolicy};

use crate::error::{HarnessError, Result};
use crate::wire::{encode_error, encode_reply, Request};

#[derive(Clone, Debug)]
pub enum StubMode {
    /// Answers with the canonical output of its own grammar.
    Oracle(Grammar),
    /// Answers with the query words themselves.
    Echo,
}

#[derive(Clone, Debug)]
pub struct Stub {
    pub mode: StubMode,
    pub policy: ParsePolicy,
}

impl Stub {
    pub fn new(mode: StubMode) -> Self {
        Stub {
            mode,
            policy: ParsePolicy::default(),
        }
    }

    /// One response body for one request body; never fails.
    pub fn answer(&self, body: &str) -> String {
        let req: Request = match serde_json::from_str(body) {
            Ok(r) => r,
            Err(e) => return encode_error(&format!("bad request: {e}")),
        };
        match &self.mode {
            StubMode::Echo => encode_reply(&req.query),
            StubMode::Oracle(g) => match canonical_derive(g, &req.query, &self.policy) {
                Ok(out) => encode_reply(&out),
                Err(e) => encode_error(&e.to_string()),
            },
        }
    }

    /// Answers each input line with exactly one output line, flushing after each.
    pub fn serve_lines(&self, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(output, "{}", self.answer(&line))?;
            output.flush()?;
        }
        Ok(())
    }

    /// Serves `POST /transduce` on `addr` from a background thread until the
    /// returned handle is dropped.
    pub fn serve_http(self, addr: &str) -> Result<HttpStub> {
        let server = tiny_http::Server::http(addr).map_err(|e| HarnessError::Config(format!("cannot bind {addr}: {e}")))?;
        let server = Arc::new(server);
        let url = format!("http://{}", server.server_addr());
        let worker = server.clone();
        let thread = std::thread::spawn(move || {
            for mut req in worker.incoming_requests() {
                let mut body = String::new();
                let read = req.as_reader().read_to_string(&mut body);
                let routed = *req.method() == tiny_http::Method::Post && req.url() == "/transduce";
                let response = if !routed {
                    tiny_http::Response::from_string(encode_error("not found")).with_status_code(404)
                } else if read.is_err() {
                    tiny_http::Response::from_string(encode_error("unreadable body")).with_status_code(400)
                } else {
                    tiny_http::Response::from_string(self.answer(&body))
                };
                let header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
                let _ = req.respond(response.with_header(header));
            }
        });
        Ok(HttpStub {
            server,
            url,
            thread: Some(thread),
        })
    }
}

pub struct HttpStub {
    server: Arc<tiny_http::Server>,
    pub url: String,
    thread: Option<JoinHandle<()>>,
}

impl HttpStub {
    /// Blocks until the server stops, which only happens on drop elsewhere.
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for HttpStub {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
