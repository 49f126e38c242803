//! Clients for external transducers and the loop that collects a run.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use transduce::{Episode, Response, RunRecord};

use crate::error::{HarnessError, Result};
use crate::wire::{decode_reply, Request};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Transport {
    /// A program reading one request line and writing one response line.
    Stdio { command: Vec<String> },
    /// A server answering `POST {url}/transduce`.
    Http { url: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdapterSpec {
    pub transport: Transport,
    pub samples: usize,
    pub timeout: Duration,
    /// Whether requests for different queries may be in flight together.
    pub concurrent: bool,
    pub model: Option<String>,
}

impl AdapterSpec {
    pub fn new(transport: Transport) -> Self {
        AdapterSpec {
            transport,
            samples: 10,
            timeout: Duration::from_secs(30),
            concurrent: false,
            model: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(HarnessError::Config("samples must be at least 1".into()));
        }
        if self.timeout.is_zero() {
            return Err(HarnessError::Config("timeout must be positive".into()));
        }
        match &self.transport {
            Transport::Stdio { command } if command.is_empty() => {
                Err(HarnessError::Config("adapter command is empty".into()))
            }
            Transport::Http { url } if url.is_empty() => Err(HarnessError::Config("adapter URL is empty".into())),
            _ => Ok(()),
        }
    }
}

pub trait Adapter {
    fn transduce(&mut self, req: &Request) -> Result<Response>;
}

pub struct StdioAdapter {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl StdioAdapter {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| HarnessError::Config("adapter command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| HarnessError::AdapterTimeout {
                after_ms: 0,
                detail: format!("cannot start `{program}`: {e}"),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(StdioAdapter {
            child,
            stdin,
            lines,
            timeout,
        })
    }

    fn gone(&self, detail: impl Into<String>) -> HarnessError {
        HarnessError::AdapterTimeout {
            after_ms: self.timeout.as_millis() as u64,
            detail: detail.into(),
        }
    }
}

impl Adapter for StdioAdapter {
    fn transduce(&mut self, req: &Request) -> Result<Response> {
        let mut line = req.to_line();
        line.push('\n');
        if let Err(e) = self.stdin.write_all(line.as_bytes()).and_then(|_| self.stdin.flush()) {
            return Err(self.gone(format!("adapter stopped reading: {e}")));
        }
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => decode_reply(&reply),
            Ok(Err(e)) => Err(self.gone(format!("reading adapter output: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(self.gone("no response line")),
            Err(RecvTimeoutError::Disconnected) => Err(self.gone("adapter exited")),
        }
    }
}

impl Drop for StdioAdapter {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct HttpAdapter {
    agent: ureq::Agent,
    url: String,
    timeout: Duration,
}

impl HttpAdapter {
    pub fn new(base: &str, timeout: Duration) -> Self {
        let base = base.trim_end_matches('/');
        let url = if base.ends_with("/transduce") {
            base.to_string()
        } else {
            format!("{base}/transduce")
        };
        HttpAdapter {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            url,
            timeout,
        }
    }
}

impl Adapter for HttpAdapter {
    fn transduce(&mut self, req: &Request) -> Result<Response> {
        let sent = self
            .agent
            .post(&self.url)
            .set("Content-Type", "application/json")
            .send_string(&req.to_line());
        match sent {
            Ok(resp) => {
                let body = resp.into_string().map_err(|e| HarnessError::Protocol {
                    message: format!("unreadable body: {e}"),
                    payload: String::new(),
                })?;
                decode_reply(&body)
            }
            Err(ureq::Error::Status(code, resp)) => Err(HarnessError::Protocol {
                message: format!("HTTP status {code}"),
                payload: resp.into_string().unwrap_or_default(),
            }),
            Err(ureq::Error::Transport(t)) => Err(HarnessError::AdapterTimeout {
                after_ms: self.timeout.as_millis() as u64,
                detail: t.to_string(),
            }),
        }
    }
}

/// Asks `adapter` for `samples` answers to every query, in query order. The
/// grammar never leaves the harness: requests carry the support pairs and
/// the query only.
pub fn run_adapter(adapter: &mut dyn Adapter, e: &Episode, samples: usize, model: Option<String>) -> Result<RunRecord> {
    let mut responses = Vec::with_capacity(e.query.len());
    for q in &e.query {
        let mut row = Vec::with_capacity(samples);
        for sample in 0..samples {
            let req = Request {
                support: e.support.clone(),
                query: q.input.clone(),
                sample,
            };
            row.push(adapter.transduce(&req)?);
        }
        responses.push(row);
    }
    Ok(RunRecord {
        episode: e.id.clone(),
        samples_per_query: samples,
        responses,
        model,
    })
}

pub fn run_model(spec: &AdapterSpec, e: &Episode) -> Result<RunRecord> {
    spec.validate()?;
    match &spec.transport {
        Transport::Stdio { command } => {
            let mut a = StdioAdapter::spawn(command, spec.timeout)?;
            run_adapter(&mut a, e, spec.samples, spec.model.clone())
        }
        Transport::Http { url } if spec.concurrent => {
            let rows: Vec<Result<RunRecord>> = thread::scope(|s| {
                let handles: Vec<_> = e
                    .query
                    .iter()
                    .map(|q| {
                        let one = Episode {
                            query: vec![q.clone()],
                            ..e.clone()
                        };
                        s.spawn(move || {
                            let mut a = HttpAdapter::new(url, spec.timeout);
                            run_adapter(&mut a, &one, spec.samples, None)
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("request thread")).collect()
            });
            let mut responses = Vec::with_capacity(rows.len());
            for r in rows {
                responses.extend(r?.responses);
            }
            Ok(RunRecord {
                episode: e.id.clone(),
                samples_per_query: spec.samples,
                responses,
                model: spec.model.clone(),
            })
        }
        Transport::Http { url } => {
            let mut a = HttpAdapter::new(url, spec.timeout);
            run_adapter(&mut a, e, spec.samples, spec.model.clone())
        }
    }
}
