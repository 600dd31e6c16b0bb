//! Client for an out-of-process Atari emulator.
//!
//! The server is a child process talking a line-framed protocol over its
//! standard input and output. Requests and responses strictly alternate:
//!
//! ```text
//! -> INIT <rom>\n
//! <- OK <width> <height> <k> <a1> ... <ak>\n      (or ERR <reason>\n)
//! -> RESET <seed>\n
//! <- R <reward> <done 0|1>\n  + 3·width·height bytes
//! -> ACT <global action id>\n
//! <- R <reward> <done 0|1>\n  + 3·width·height bytes
//! ```
//!
//! Frame bytes are the red, green and blue planes in turn, each row-major
//! with one byte per pixel. The `a1..ak` list gives the legal actions as ids
//! into [`ALE_ACTIONS`]; the program's outputs index this list.

use std::collections::VecDeque;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::env::{Environment, Observation, Transition};
use crate::error::EnvError;
use crate::value::Matrix;

/// The full joystick action table, indexed by global action id.
pub const ALE_ACTIONS: [&str; 18] = [
    "NOOP",
    "FIRE",
    "UP",
    "RIGHT",
    "LEFT",
    "DOWN",
    "UPRIGHT",
    "UPLEFT",
    "DOWNRIGHT",
    "DOWNLEFT",
    "UPFIRE",
    "RIGHTFIRE",
    "LEFTFIRE",
    "DOWNFIRE",
    "UPRIGHTFIRE",
    "UPLEFTFIRE",
    "DOWNRIGHTFIRE",
    "DOWNLEFTFIRE",
];

/// Smallest legal action subset a game may expose.
pub const MIN_LEGAL_ACTIONS: usize = 4;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("failed to start emulator server `{path}`: {source}")]
    Spawn { path: String, source: io::Error },
    #[error("i/o error talking to emulator: {0}")]
    Io(#[from] io::Error),
    #[error("emulator did not answer within {0:?}")]
    Timeout(Duration),
    #[error("emulator closed the connection")]
    Closed,
    #[error("emulator frame ended after {got} of {expected} bytes")]
    ShortRead { expected: usize, got: usize },
    #[error("emulator reported an error: {0}")]
    Server(String),
    #[error("malformed reply `{0}`")]
    Malformed(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

/// Where to find the emulator server.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeConfig {
    pub server: PathBuf,
    pub rom_dir: PathBuf,
    pub timeout: Duration,
}

impl BridgeConfig {
    pub fn new(server: impl Into<PathBuf>, rom_dir: impl Into<PathBuf>) -> Self {
        BridgeConfig {
            server: server.into(),
            rom_dir: rom_dir.into(),
            timeout: DEFAULT_TIMEOUT,
        }
    }
}

/// Result of a successful `INIT`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Handshake {
    pub width: usize,
    pub height: usize,
    /// Global action ids of the legal subset, in program-output order.
    pub legal_actions: Vec<usize>,
}

/// One protocol session. Any error poisons the session.
pub struct BridgeSession {
    writer: Box<dyn Write + Send>,
    incoming: Receiver<io::Result<Vec<u8>>>,
    buffer: VecDeque<u8>,
    timeout: Duration,
    child: Option<Child>,
    handshake: Option<Handshake>,
    frames: u64,
    poisoned: bool,
}

impl BridgeSession {
    /// Launches `<server> <rom_dir>` and talks to it over stdio.
    pub fn spawn(config: &BridgeConfig) -> Result<Self, BridgeError> {
        let mut child = Command::new(&config.server)
            .arg(&config.rom_dir)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| BridgeError::Spawn {
                path: config.server.display().to_string(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut session = Self::from_streams(stdout, stdin, config.timeout);
        session.child = Some(child);
        Ok(session)
    }

    /// Runs the protocol over arbitrary streams.
    pub fn from_streams<R, W>(reader: R, writer: W, timeout: Duration) -> Self
    where
        R: Read + Send + 'static,
        W: Write + Send + 'static,
    {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            let mut reader = reader;
            let mut buf = vec![0u8; 1 << 16];
            loop {
                match reader.read(&mut buf) {
                    Ok(0) => break,
                    Ok(n) => {
                        if tx.send(Ok(buf[..n].to_vec())).is_err() {
                            break;
                        }
                    }
                    Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        BridgeSession {
            writer: Box::new(writer),
            incoming: rx,
            buffer: VecDeque::new(),
            timeout,
            child: None,
            handshake: None,
            frames: 0,
            poisoned: false,
        }
    }

    pub fn handshake_info(&self) -> Option<&Handshake> {
        self.handshake.as_ref()
    }

    /// Frames answered since the handshake.
    pub fn frames(&self) -> u64 {
        self.frames
    }

    /// Sends `INIT <rom>` and parses the `OK` reply.
    pub fn handshake(&mut self, rom: &str) -> Result<Handshake, BridgeError> {
        self.guard()?;
        if self.handshake.is_some() {
            return self.fail(BridgeError::Protocol("duplicate INIT".into()));
        }
        if rom.is_empty() || rom.contains(char::is_whitespace) {
            return self.fail(BridgeError::Protocol(format!("invalid rom id `{rom}`")));
        }
        let result = self
            .send(&format!("INIT {rom}\n"))
            .and_then(|_| self.read_line())
            .and_then(|line| parse_ok(&line));
        match result {
            Ok(h) => {
                self.handshake = Some(h.clone());
                Ok(h)
            }
            Err(e) => self.fail(e),
        }
    }

    /// Starts a new episode.
    pub fn reset(&mut self, seed: u64) -> Result<Observation, BridgeError> {
        let (obs, _, _) = self.exchange(&format!("RESET {seed}\n"))?;
        Ok(obs)
    }

    /// Plays the legal action at `local` index.
    pub fn step(&mut self, local: usize) -> Result<(Observation, f64, bool), BridgeError> {
        self.guard()?;
        let global = match self.handshake.as_ref() {
            Some(h) => match h.legal_actions.get(local) {
                Some(&g) => g,
                None => {
                    let n = h.legal_actions.len();
                    return self.fail(BridgeError::Protocol(format!(
                        "local action {local} out of range for {n} legal actions"
                    )));
                }
            },
            None => return self.fail(BridgeError::Protocol("ACT before INIT".into())),
        };
        self.exchange(&format!("ACT {global}\n"))
    }

    fn exchange(&mut self, request: &str) -> Result<(Observation, f64, bool), BridgeError> {
        self.guard()?;
        let (width, height) = match self.handshake.as_ref() {
            Some(h) => (h.width, h.height),
            None => return self.fail(BridgeError::Protocol("request before INIT".into())),
        };
        let result = self.send(request).and_then(|_| {
            let line = self.read_line()?;
            let (reward, done) = parse_step(&line)?;
            let bytes = self.read_exact(3 * width * height)?;
            Ok((decode_frame(&bytes, width, height), reward, done))
        });
        match result {
            Ok(r) => {
                self.frames += 1;
                Ok(r)
            }
            Err(e) => self.fail(e),
        }
    }

    fn guard(&self) -> Result<(), BridgeError> {
        if self.poisoned {
            Err(BridgeError::Protocol(
                "session aborted by an earlier error".into(),
            ))
        } else {
            Ok(())
        }
    }

    fn fail<T>(&mut self, e: BridgeError) -> Result<T, BridgeError> {
        self.poisoned = true;
        Err(e)
    }

    fn send(&mut self, msg: &str) -> Result<(), BridgeError> {
        self.writer.write_all(msg.as_bytes())?;
        self.writer.flush()?;
        Ok(())
    }

    /// Pulls one chunk into the buffer. `Ok(false)` means end of stream.
    fn fill(&mut self, deadline: Instant) -> Result<bool, BridgeError> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.incoming.recv_timeout(left) {
            Ok(Ok(chunk)) => {
                self.buffer.extend(chunk);
                Ok(true)
            }
            Ok(Err(e)) => Err(BridgeError::Io(e)),
            Err(RecvTimeoutError::Timeout) => Err(BridgeError::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => Ok(false),
        }
    }

    fn read_line(&mut self) -> Result<String, BridgeError> {
        let deadline = Instant::now() + self.timeout;
        loop {
            if let Some(pos) = self.buffer.iter().position(|&b| b == b'\n') {
                let line: Vec<u8> = self.buffer.drain(..=pos).collect();
                let text = String::from_utf8_lossy(&line[..pos]);
                return Ok(text.trim_end_matches('\r').to_string());
            }
            if !self.fill(deadline)? {
                return Err(BridgeError::Closed);
            }
        }
    }

    fn read_exact(&mut self, n: usize) -> Result<Vec<u8>, BridgeError> {
        let deadline = Instant::now() + self.timeout;
        while self.buffer.len() < n {
            if !self.fill(deadline)? {
                return Err(BridgeError::ShortRead {
                    expected: n,
                    got: self.buffer.len(),
                });
            }
        }
        Ok(self.buffer.drain(..n).collect())
    }
}

impl Drop for BridgeSession {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

fn parse_ok(line: &str) -> Result<Handshake, BridgeError> {
    let malformed = || BridgeError::Malformed(line.to_string());
    let mut fields = line.split_ascii_whitespace();
    match fields.next() {
        Some("OK") => {}
        Some("ERR") => {
            let reason = line.trim_start().strip_prefix("ERR").unwrap_or("").trim();
            return Err(BridgeError::Server(reason.to_string()));
        }
        _ => return Err(malformed()),
    }
    let mut number = || -> Result<usize, BridgeError> {
        fields
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or_else(malformed)
    };
    let width = number()?;
    let height = number()?;
    let k = number()?;
    if width == 0 || height == 0 || !(MIN_LEGAL_ACTIONS..=ALE_ACTIONS.len()).contains(&k) {
        return Err(malformed());
    }
    let legal_actions = (0..k).map(|_| number()).collect::<Result<Vec<_>, _>>()?;
    if fields.next().is_some() || legal_actions.iter().any(|&a| a >= ALE_ACTIONS.len()) {
        return Err(malformed());
    }
    Ok(Handshake {
        width,
        height,
        legal_actions,
    })
}

fn parse_step(line: &str) -> Result<(f64, bool), BridgeError> {
    let mut fields = line.split_ascii_whitespace();
    match fields.next() {
        Some("R") => {}
        Some("ERR") => {
            let reason = line.trim_start().strip_prefix("ERR").unwrap_or("").trim();
            return Err(BridgeError::Server(reason.to_string()));
        }
        _ => return Err(BridgeError::Malformed(line.to_string())),
    }
    let reward = fields
        .next()
        .and_then(|f| f.parse::<f64>().ok())
        .filter(|r| r.is_finite());
    let done = match fields.next() {
        Some("0") => Some(false),
        Some("1") => Some(true),
        _ => None,
    };
    match (reward, done, fields.next()) {
        (Some(r), Some(d), None) => Ok((r, d)),
        _ => Err(BridgeError::Malformed(line.to_string())),
    }
}

/// Splits raw RGB plane bytes into an observation scaled by 1/255.
pub fn decode_frame(bytes: &[u8], width: usize, height: usize) -> Observation {
    let plane = width * height;
    assert_eq!(bytes.len(), 3 * plane);
    let to_matrix = |b: &[u8]| {
        Matrix::new(
            height,
            width,
            b.iter().map(|&v| f64::from(v) / 255.0).collect(),
        )
    };
    Observation::new(
        to_matrix(&bytes[..plane]),
        to_matrix(&bytes[plane..2 * plane]),
        to_matrix(&bytes[2 * plane..]),
    )
}

/// An emulator game exposed as an [`Environment`].
pub struct AleEnvironment {
    session: BridgeSession,
    n_actions: usize,
    done: bool,
    started: bool,
}

impl AleEnvironment {
    pub fn connect(config: &BridgeConfig, rom: &str) -> Result<Self, BridgeError> {
        Self::with_session(BridgeSession::spawn(config)?, rom)
    }

    pub fn with_session(mut session: BridgeSession, rom: &str) -> Result<Self, BridgeError> {
        let handshake = session.handshake(rom)?;
        Ok(AleEnvironment {
            session,
            n_actions: handshake.legal_actions.len(),
            done: false,
            started: false,
        })
    }

    pub fn session(&self) -> &BridgeSession {
        &self.session
    }
}

impl Environment for AleEnvironment {
    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let obs = self.session.reset(seed)?;
        self.done = false;
        self.started = true;
        Ok(obs)
    }

    fn step(&mut self, action: usize) -> Result<Transition, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        if action >= self.n_actions {
            return Err(EnvError::InvalidAction {
                action,
                n_actions: self.n_actions,
            });
        }
        let (observation, reward, done) = self.session.step(action)?;
        self.done = done;
        Ok(Transition {
            observation,
            reward,
            done,
        })
    }
}
