//! Fitness from a long-running external process.
//!
//! For each genome the process receives the genome text followed by a blank
//! line on stdin, and must answer with one line `fitness <decimal>` on stdout.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::Environment;
use crate::error::EnvError;
use crate::neat::{Genome, NetworkShape};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// A spawned evaluator. Requests are answered strictly in order.
pub struct ExternalProcess {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ExternalProcess {
    /// Spawns `program args...` with piped stdin and stdout.
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self, EnvError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| EnvError::Protocol("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalProcess {
            child,
            stdin,
            lines: rx,
            timeout,
        })
    }

    /// Convenience for `sh -c <script>`.
    pub fn shell(script: &str, timeout: Duration) -> Result<Self, EnvError> {
        Self::spawn(&["sh".into(), "-c".into(), script.into()], timeout)
    }

    pub fn evaluate(&mut self, genome: &Genome) -> Result<f64, EnvError> {
        let stdin = self.stdin.as_mut().ok_or(EnvError::ProcessExited)?;
        let sent = write!(stdin, "{}\n", genome.to_text()).and_then(|_| stdin.flush());
        if let Err(e) = sent {
            return Err(if e.kind() == std::io::ErrorKind::BrokenPipe {
                EnvError::ProcessExited
            } else {
                EnvError::Io(e)
            });
        }
        let line = match self.lines.recv_timeout(self.timeout) {
            Ok(line) => line?,
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                return Err(EnvError::Timeout(self.timeout));
            }
            Err(RecvTimeoutError::Disconnected) => return Err(EnvError::ProcessExited),
        };
        parse_reply(&line)
    }

    fn kill(&mut self) {
        self.stdin = None;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for ExternalProcess {
    fn drop(&mut self) {
        self.kill();
    }
}

fn parse_reply(line: &str) -> Result<f64, EnvError> {
    let mut parts = line.split_whitespace();
    match (parts.next(), parts.next(), parts.next()) {
        (Some("fitness"), Some(v), None) => {
            let f: f64 = v
                .parse()
                .map_err(|_| EnvError::Protocol(format!("bad fitness value in `{line}`")))?;
            if f.is_finite() {
                Ok(f)
            } else {
                Err(EnvError::Protocol(format!("non-finite fitness in `{line}`")))
            }
        }
        _ => Err(EnvError::Protocol(format!("expected `fitness <value>`, got `{line}`"))),
    }
}

/// An [`Environment`] backed by one external process, shared behind a lock.
pub struct ExternalEnv {
    command: Vec<String>,
    shape: NetworkShape,
    process: Mutex<ExternalProcess>,
}

impl ExternalEnv {
    pub fn new(command: Vec<String>, shape: NetworkShape, timeout: Duration) -> Result<Self, EnvError> {
        let process = ExternalProcess::spawn(&command, timeout)?;
        Ok(ExternalEnv {
            command,
            shape,
            process: Mutex::new(process),
        })
    }

    /// Runs `script` through `sh -c`.
    pub fn shell(script: &str, shape: NetworkShape, timeout: Duration) -> Result<Self, EnvError> {
        Self::new(vec!["sh".into(), "-c".into(), script.into()], shape, timeout)
    }
}

impl Environment for ExternalEnv {
    fn name(&self) -> String {
        format!("external:{}", self.command.join(" "))
    }

    fn shape(&self) -> NetworkShape {
        self.shape
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EnvError> {
        let mut p = self.process.lock().unwrap_or_else(|e| e.into_inner());
        p.evaluate(genome)
    }
}
