//! Line-delimited JSON protocol (version 1) spoken with an external
//! target-prediction service, plus an optional remote semantic scorer.
//!
//! One request per line, one response per line. Byte layout is documented in
//! `docs/FORMATS.md`.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellCoord, ClassId, GridLayer};
use crate::prediction::{HeuristicPredictor, PredictOutcome, PredictedTargets, TargetPredictor};
use crate::world::{AgentPose, OracleScorer, Scene, SemanticScorer};

pub const PROTOCOL_VERSION: u32 = 1;

/// Confidences travel as integers in thousandths.
pub const CONFIDENCE_SCALE: f64 = 1000.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictRequest {
    pub v: u32,
    pub w: usize,
    pub h: usize,
    pub target_class: u16,
    pub smap: Vec<u16>,
    pub cmap: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub v: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub v: u32,
    pub op: String,
    pub w: usize,
    pub h: usize,
    pub target_class: u16,
    pub pose: [f64; 3],
    pub visible: Vec<[i32; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub v: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredictRequest {
    pub fn from_maps(smap: &GridLayer<ClassId>, cmap: &GridLayer<f64>, target_class: ClassId) -> Result<Self> {
        smap.same_dims(cmap)?;
        let (w, h) = smap.dims();
        Ok(Self {
            v: PROTOCOL_VERSION,
            w,
            h,
            target_class: target_class.0,
            smap: smap.cells().iter().map(|k| k.0).collect(),
            cmap: cmap.cells().iter().map(|&c| (c.clamp(0.0, 1.0) * CONFIDENCE_SCALE).round() as u16).collect(),
        })
    }

    pub fn to_maps(&self, resolution: f64) -> Result<(GridLayer<ClassId>, GridLayer<f64>, ClassId)> {
        self.check()?;
        let smap = GridLayer::from_vec(self.w, self.h, resolution, self.smap.iter().map(|&k| ClassId(k)).collect())?;
        let cmap = GridLayer::from_vec(
            self.w,
            self.h,
            resolution,
            self.cmap.iter().map(|&c| f64::from(c) / CONFIDENCE_SCALE).collect(),
        )?;
        Ok((smap, cmap, ClassId(self.target_class)))
    }

    pub fn check(&self) -> Result<()> {
        if self.v != PROTOCOL_VERSION {
            return Err(Error::Protocol(format!("unsupported version {}", self.v)));
        }
        let n = self.w * self.h;
        if self.smap.len() != n || self.cmap.len() != n {
            return Err(Error::Protocol(format!(
                "map sizes {}/{} do not match {}x{}",
                self.smap.len(),
                self.cmap.len(),
                self.w,
                self.h
            )));
        }
        if self.cmap.iter().any(|&c| f64::from(c) > CONFIDENCE_SCALE) {
            return Err(Error::Protocol("confidence above 1000".into()));
        }
        Ok(())
    }
}

pub fn encode_line<T: Serialize>(msg: &T) -> String {
    let mut s = serde_json::to_string(msg).expect("protocol messages serialize");
    s.push('\n');
    s
}

pub fn decode_line<'a, T: Deserialize<'a>>(line: &'a str) -> Result<T> {
    serde_json::from_str(line.trim_end_matches(['\n', '\r'])).map_err(|e| Error::Protocol(e.to_string()))
}

/// Validates a prediction response and clamps its points into the grid.
pub fn response_points(resp: &PredictResponse, dims: (usize, usize)) -> Result<PredictedTargets> {
    if resp.v != PROTOCOL_VERSION {
        return Err(Error::Protocol(format!("unsupported version {}", resp.v)));
    }
    if let Some(err) = &resp.error {
        return Err(Error::Protocol(format!("service error: {err}")));
    }
    let pts = resp.points.as_ref().ok_or_else(|| Error::Protocol("response has no points".into()))?;
    if pts.is_empty() {
        return Err(Error::Protocol("response has no points".into()));
    }
    let mut points = Vec::with_capacity(pts.len());
    for &[x, y] in pts {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Protocol("non-finite coordinate".into()));
        }
        points.push(CellCoord::new(
            (x.round() as i64).clamp(0, dims.0 as i64 - 1) as i32,
            (y.round() as i64).clamp(0, dims.1 as i64 - 1) as i32,
        ));
    }
    Ok(PredictedTargets { points })
}

/// A request/response line channel.
pub trait LineTransport: Send {
    fn round_trip(&mut self, line: &str) -> Result<String>;
}

/// `host:port` stream socket, reconnected lazily after any failure.
pub struct TcpTransport {
    addr: String,
    timeout: Duration,
    conn: Option<(BufReader<TcpStream>, TcpStream)>,
}

impl TcpTransport {
    pub fn new(addr: impl Into<String>, timeout: Duration) -> Self {
        Self { addr: addr.into(), timeout, conn: None }
    }

    fn connect(&mut self) -> Result<&mut (BufReader<TcpStream>, TcpStream)> {
        if self.conn.is_none() {
            let sock = self
                .addr
                .to_socket_addrs()?
                .next()
                .ok_or_else(|| Error::Protocol(format!("cannot resolve {}", self.addr)))?;
            let stream = TcpStream::connect_timeout(&sock, self.timeout)?;
            stream.set_read_timeout(Some(self.timeout))?;
            stream.set_write_timeout(Some(self.timeout))?;
            stream.set_nodelay(true)?;
            let reader = BufReader::new(stream.try_clone()?);
            self.conn = Some((reader, stream));
        }
        Ok(self.conn.as_mut().expect("just connected"))
    }
}

impl LineTransport for TcpTransport {
    fn round_trip(&mut self, line: &str) -> Result<String> {
        let result = (|| {
            let (reader, writer) = self.connect()?;
            writer.write_all(line.as_bytes())?;
            writer.flush()?;
            let mut resp = String::new();
            if reader.read_line(&mut resp)? == 0 {
                return Err(Error::Protocol("connection closed".into()));
            }
            Ok(resp)
        })();
        if result.is_err() {
            self.conn = None;
        }
        result
    }
}

/// A child process speaking the protocol on stdin/stdout.
pub struct StdioTransport {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl StdioTransport {
    pub fn spawn(program: &str, args: &[String], timeout: Duration) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines, timeout })
    }
}

impl LineTransport for StdioTransport {
    fn round_trip(&mut self, line: &str) -> Result<String> {
        self.stdin.write_all(line.as_bytes())?;
        self.stdin.flush()?;
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(l)) => Ok(l),
            Ok(Err(e)) => Err(e.into()),
            Err(RecvTimeoutError::Timeout) => Err(Error::Protocol("timed out waiting for response".into())),
            Err(RecvTimeoutError::Disconnected) => Err(Error::Protocol("service exited".into())),
        }
    }
}

impl Drop for StdioTransport {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Opens `tcp://host:port` (or bare `host:port`) or `exec:<program> [args..]`.
pub fn open_endpoint(endpoint: &str, timeout: Duration) -> Result<Box<dyn LineTransport>> {
    if let Some(cmd) = endpoint.strip_prefix("exec:") {
        let mut parts = cmd.split_whitespace().map(str::to_owned);
        let program = parts.next().ok_or_else(|| Error::Config("empty exec endpoint".into()))?;
        let args: Vec<String> = parts.collect();
        Ok(Box::new(StdioTransport::spawn(&program, &args, timeout)?))
    } else {
        let addr = endpoint.strip_prefix("tcp://").unwrap_or(endpoint);
        Ok(Box::new(TcpTransport::new(addr, timeout)))
    }
}

/// Client for the learned predictor. Any transport or protocol failure falls
/// back to the heuristic predictor and is reported in the outcome.
pub struct RemotePredictor {
    transport: Option<Box<dyn LineTransport>>,
    open_error: Option<String>,
    fallback: HeuristicPredictor,
}

impl RemotePredictor {
    pub fn new(transport: Box<dyn LineTransport>, fallback: HeuristicPredictor) -> Self {
        Self { transport: Some(transport), open_error: None, fallback }
    }

    pub fn connect(endpoint: &str, timeout: Duration, fallback: HeuristicPredictor) -> Self {
        match open_endpoint(endpoint, timeout) {
            Ok(t) => Self::new(t, fallback),
            Err(e) => Self { transport: None, open_error: Some(e.to_string()), fallback },
        }
    }

    fn remote(
        &mut self,
        smap: &GridLayer<ClassId>,
        cmap: &GridLayer<f64>,
        target_class: ClassId,
    ) -> Result<PredictedTargets> {
        let transport =
            self.transport.as_mut().ok_or_else(|| Error::Protocol(self.open_error.clone().unwrap_or_default()))?;
        let req = PredictRequest::from_maps(smap, cmap, target_class)?;
        let line = transport.round_trip(&encode_line(&req))?;
        let resp: PredictResponse = decode_line(&line)?;
        response_points(&resp, smap.dims())
    }
}

impl TargetPredictor for RemotePredictor {
    fn predict(
        &mut self,
        smap: &GridLayer<ClassId>,
        cmap: &GridLayer<f64>,
        target_class: ClassId,
    ) -> Result<PredictOutcome> {
        smap.same_dims(cmap)?;
        match self.remote(smap, cmap, target_class) {
            Ok(targets) => Ok(PredictOutcome { targets, fallback: None }),
            Err(e) => {
                log::warn!("remote predictor failed, using heuristic: {e}");
                let mut out = self.fallback.predict(smap, cmap, target_class)?;
                out.fallback = Some(e.to_string());
                Ok(out)
            }
        }
    }
}

/// Remote semantic scorer; falls back to the oracle on failure.
pub struct RemoteScorer {
    transport: Option<Box<dyn LineTransport>>,
    fallback: OracleScorer,
    pub failures: usize,
}

impl RemoteScorer {
    pub fn new(transport: Box<dyn LineTransport>, fallback: OracleScorer) -> Self {
        Self { transport: Some(transport), fallback, failures: 0 }
    }

    pub fn connect(endpoint: &str, timeout: Duration, fallback: OracleScorer) -> Self {
        let transport = open_endpoint(endpoint, timeout).ok();
        Self { transport, fallback, failures: 0 }
    }

    fn remote(&mut self, scene: &Scene, pose: &AgentPose, visible: &[CellCoord], target: ClassId) -> Result<f64> {
        let t = self.transport.as_mut().ok_or_else(|| Error::Protocol("scorer endpoint unavailable".into()))?;
        let req = ScoreRequest {
            v: PROTOCOL_VERSION,
            op: "score".into(),
            w: scene.width(),
            h: scene.height(),
            target_class: target.0,
            pose: [pose.x, pose.y, pose.heading],
            visible: visible.iter().map(|c| [c.x, c.y]).collect(),
        };
        let resp: ScoreResponse = decode_line(&t.round_trip(&encode_line(&req))?)?;
        if resp.v != PROTOCOL_VERSION {
            return Err(Error::Protocol(format!("unsupported version {}", resp.v)));
        }
        match (resp.score, resp.error) {
            (_, Some(e)) => Err(Error::Protocol(format!("service error: {e}"))),
            (Some(s), None) if (0.0..=1.0).contains(&s) => Ok(s),
            _ => Err(Error::Protocol("missing or out-of-range score".into())),
        }
    }
}

impl SemanticScorer for RemoteScorer {
    fn score(&mut self, scene: &Scene, pose: &AgentPose, visible: &[CellCoord], target: ClassId, seed: u64) -> f64 {
        match self.remote(scene, pose, visible, target) {
            Ok(s) => s,
            Err(e) => {
                self.failures += 1;
                log::warn!("remote scorer failed, using oracle: {e}");
                self.fallback.score(scene, pose, visible, target, seed)
            }
        }
    }
}
