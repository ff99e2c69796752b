//! Foreign compressors as mixture components.
//!
//! A base model can live in another executable (a code-table miner, say). The
//! adapter talks to it through two text files in a fresh temporary directory
//! per call. The request lists the records to compress:
//!
//! ```text
//! FIT <n> <m>
//! <n lines of m space-separated integer codes>
//! ```
//!
//! and the tool answers with its model cost and one cost per record, all in
//! bits:
//!
//! ```text
//! HCOST <bits>
//! ICOST <bits>      (n lines, in request order)
//! ```
//!
//! Record costs must exclude the model cost. Tools that can also score
//! records they were not fitted on declare `scores_unseen = true`; the adapter
//! then appends
//!
//! ```text
//! SCORE <q>
//! <q lines of m codes>
//! ```
//!
//! to the request and expects `q` further `ICOST` lines after the first `n`.
//!
//! The adapter checks that every cost is finite and nonnegative. It cannot
//! check the Kraft inequality; producing valid codelengths is the tool's
//! obligation.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::Duration;

use mdlad_core::{Hypothesis, Learner};
use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

/// Environment variables set for every invocation.
pub const ENV_REQUEST: &str = "MDLAD_REQUEST";
pub const ENV_RESPONSE: &str = "MDLAD_RESPONSE";
pub const ENV_ARITIES: &str = "MDLAD_ARITIES";

#[derive(Debug, thiserror::Error)]
pub enum AdapterError {
    #[error("invalid adapter descriptor: {0}")]
    Descriptor(String),

    #[error("cannot start {command:?}: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },

    #[error("adapter I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("compressor timed out after {secs}s{}", stderr_suffix(.stderr))]
    Timeout { secs: f64, stderr: String },

    #[error("compressor exited with {status}{}", stderr_suffix(.stderr))]
    Failed { status: String, stderr: String },

    #[error("malformed response line {line} {content:?}: {reason}{}", stderr_suffix(.stderr))]
    Malformed {
        line: usize,
        content: String,
        reason: String,
        stderr: String,
    },

    #[error("malformed request line {line}: {reason}")]
    BadRequest { line: usize, reason: String },

    #[error("cannot fit an external model to zero records")]
    EmptySample,

    #[error("external model has not been fitted")]
    Unfitted,

    #[error("record {0:?} is outside the fitted sample and the compressor cannot score unseen records")]
    UnknownRecord(Vec<u32>),
}

fn stderr_suffix(stderr: &str) -> String {
    let s = stderr.trim();
    if s.is_empty() {
        String::new()
    } else {
        // Keep the tail; that is where tools put the actual failure.
        let start = s.len().saturating_sub(2000);
        let start = (start..=s.len()).find(|&i| s.is_char_boundary(i)).unwrap_or(0);
        format!("; stderr: {}", &s[start..])
    }
}

type Result<T> = std::result::Result<T, AdapterError>;

/// How to run the compressor.
///
/// `args` may contain the placeholders `{request}`, `{response}` and
/// `{arities}` (comma-separated column arities); the same values are
/// exported as `MDLAD_REQUEST`, `MDLAD_RESPONSE` and `MDLAD_ARITIES`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Descriptor {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Directory the tool runs in; the per-call temporary directory when
    /// unset.
    #[serde(default)]
    pub working_dir: Option<PathBuf>,
    /// Whether the tool accepts a `SCORE` section.
    #[serde(default)]
    pub scores_unseen: bool,
}

fn default_timeout() -> f64 {
    300.0
}

impl Descriptor {
    pub fn new(command: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            command: command.into(),
            args,
            timeout_secs: default_timeout(),
            working_dir: None,
            scores_unseen: false,
        }
    }

    /// Reads a TOML or JSON descriptor (by extension; TOML otherwise).
    /// A relative `working_dir`, and a relative `command` containing a path
    /// separator, are resolved against the descriptor's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| AdapterError::Io {
            path: path.to_owned(),
            source,
        })?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut d: Self = if is_json {
            serde_json::from_str(&text).map_err(|e| AdapterError::Descriptor(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| AdapterError::Descriptor(e.to_string()))?
        };
        let base = path.parent().unwrap_or(Path::new(""));
        if d.command.contains('/') && Path::new(&d.command).is_relative() {
            d.command = base.join(&d.command).to_string_lossy().into_owned();
        }
        if let Some(w) = &d.working_dir {
            if w.is_relative() {
                d.working_dir = Some(base.join(w));
            }
        }
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.command.trim().is_empty() {
            return Err(AdapterError::Descriptor("command is empty".into()));
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return Err(AdapterError::Descriptor("timeout_secs must be positive".into()));
        }
        Ok(())
    }
}

/// Request and response encoding.
pub mod protocol {
    use super::*;

    /// A parsed request: `m` columns, the records to fit, and optional
    /// records to score.
    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct Request {
        pub m: usize,
        pub fit: Vec<Vec<u32>>,
        pub score: Vec<Vec<u32>>,
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct Response {
        pub hcost: f64,
        pub icosts: Vec<f64>,
    }

    pub fn write_request(out: &mut String, m: usize, fit: &[&[u32]], score: &[&[u32]]) {
        let rows = |out: &mut String, rows: &[&[u32]]| {
            for r in rows {
                let mut first = true;
                for v in r.iter() {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    write!(out, "{v}").expect("writing to a String");
                }
                out.push('\n');
            }
        };
        writeln!(out, "FIT {} {m}", fit.len()).expect("writing to a String");
        rows(out, fit);
        if !score.is_empty() {
            writeln!(out, "SCORE {}", score.len()).expect("writing to a String");
            rows(out, score);
        }
    }

    /// Costs are written in shortest round-trip form.
    pub fn write_response(out: &mut String, hcost: f64, icosts: &[f64]) {
        writeln!(out, "HCOST {hcost}").expect("writing to a String");
        for c in icosts {
            writeln!(out, "ICOST {c}").expect("writing to a String");
        }
    }

    fn bad(line: usize, reason: impl Into<String>) -> AdapterError {
        AdapterError::BadRequest {
            line,
            reason: reason.into(),
        }
    }

    fn header(line: Option<(usize, &str)>, keyword: &str) -> Result<(usize, Vec<usize>)> {
        let (no, text) = line.ok_or_else(|| bad(0, format!("missing {keyword} header")))?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(bad(no, format!("expected {keyword}")));
        }
        let nums = parts
            .map(|t| t.parse::<usize>().map_err(|_| bad(no, format!("bad count {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok((no, nums))
    }

    fn data_rows<'a>(
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
        count: usize,
        m: usize,
    ) -> Result<Vec<Vec<u32>>> {
        (0..count)
            .map(|_| {
                let (no, text) = lines.next().ok_or_else(|| bad(0, "request ends early"))?;
                let row = text
                    .split_whitespace()
                    .map(|t| t.parse::<u32>().map_err(|_| bad(no, format!("bad code {t:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != m {
                    return Err(bad(no, format!("{} values, expected {m}", row.len())));
                }
                Ok(row)
            })
            .collect()
    }

    pub fn parse_request(text: &str) -> Result<Request> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (no, nm) = header(lines.next(), "FIT")?;
        let [n, m] = nm[..] else {
            return Err(bad(no, "expected FIT <n> <m>"));
        };
        let fit = data_rows(&mut lines, n, m)?;
        let score = match lines.next() {
            None => Vec::new(),
            Some(l) => {
                let (no, q) = header(Some(l), "SCORE")?;
                let [q] = q[..] else {
                    return Err(bad(no, "expected SCORE <q>"));
                };
                data_rows(&mut lines, q, m)?
            }
        };
        if let Some((no, _)) = lines.next() {
            return Err(bad(no, "unexpected trailing data"));
        }
        Ok(Request { m, fit, score })
    }

    /// Parses a response carrying exactly `expected` record costs.
    /// Errors name the offending line (1-based).
    pub fn parse_response(text: &str, expected: usize) -> Result<Response> {
        let malformed = |line: usize, content: &str, reason: &str| AdapterError::Malformed {
            line,
            content: content.to_owned(),
            reason: reason.to_owned(),
            stderr: String::new(),
        };
        let mut hcost = None;
        let mut icosts = Vec::with_capacity(expected);
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let no = i + 1;
            last_line = no;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let keyword = parts.next().unwrap_or_default();
            let value = match (parts.next(), parts.next()) {
                (Some(v), None) => v,
                _ => return Err(malformed(no, raw, "expected `<KEYWORD> <bits>`")),
            };
            let bits: f64 = value
                .parse()
                .map_err(|_| malformed(no, raw, "cost is not a number"))?;
            if !bits.is_finite() || bits < 0.0 {
                return Err(malformed(no, raw, "cost must be finite and nonnegative"));
            }
            match (keyword, hcost.is_some()) {
                ("HCOST", false) => hcost = Some(bits),
                ("HCOST", true) => return Err(malformed(no, raw, "duplicate HCOST")),
                ("ICOST", true) => {
                    if icosts.len() == expected {
                        return Err(malformed(
                            no,
                            raw,
                            &format!("more than the {expected} expected ICOST lines"),
                        ));
                    }
                    icosts.push(bits);
                }
                ("ICOST", false) => return Err(malformed(no, raw, "ICOST before HCOST")),
                _ => return Err(malformed(no, raw, "unknown keyword")),
            }
        }
        let hcost = hcost.ok_or_else(|| malformed(last_line, "", "missing HCOST line"))?;
        if icosts.len() != expected {
            return Err(malformed(
                last_line,
                "",
                &format!("{} ICOST lines, expected {expected}", icosts.len()),
            ));
        }
        Ok(Response { hcost, icosts })
    }
}

use protocol::Response;

#[derive(Debug, Clone, PartialEq)]
struct Fitted {
    rows: Vec<Vec<u32>>,
    hcost: f64,
    costs: HashMap<Vec<u32>, f64>,
}

/// A base model computed by an external tool.
///
/// The handle starts unfitted; [`fit`](Self::fit) runs the tool on a record
/// subset and keeps the reported model cost and per-record costs. One
/// process runs at a time per handle; separate handles may run concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternModelHandle {
    descriptor: Arc<Descriptor>,
    arities: Vec<u32>,
    fitted: Option<Fitted>,
}

impl ExternModelHandle {
    pub fn new(descriptor: Arc<Descriptor>, arities: Vec<u32>) -> Self {
        Self {
            descriptor,
            arities,
            fitted: None,
        }
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    /// Model cost reported by the last fit.
    pub fn hypothesis_cost_bits(&self) -> Option<f64> {
        self.fitted.as_ref().map(|f| f.hcost)
    }

    /// The records the model was fitted on.
    pub fn fitted_rows(&self) -> Option<&[Vec<u32>]> {
        self.fitted.as_ref().map(|f| f.rows.as_slice())
    }

    pub fn fit(&mut self, records: &[&[u32]]) -> Result<()> {
        if records.is_empty() {
            return Err(AdapterError::EmptySample);
        }
        let response = self.invoke(records, &[])?;
        let mut costs = HashMap::with_capacity(records.len());
        for (r, &c) in records.iter().zip(&response.icosts) {
            costs.entry(r.to_vec()).or_insert(c);
        }
        self.fitted = Some(Fitted {
            rows: records.iter().map(|r| r.to_vec()).collect(),
            hcost: response.hcost,
            costs,
        });
        Ok(())
    }

    pub fn item_cost(&self, record: &[u32]) -> Result<f64> {
        Ok(self.item_costs(&[record])?[0])
    }

    /// Costs of a batch. Records outside the fitted sample are scored in a
    /// single extra call when the tool supports it.
    pub fn item_costs(&self, records: &[&[u32]]) -> Result<Vec<f64>> {
        let fitted = self.fitted.as_ref().ok_or(AdapterError::Unfitted)?;
        let mut unseen: Vec<&[u32]> = Vec::new();
        let mut unseen_index: HashMap<&[u32], usize> = HashMap::new();
        for r in records {
            if !fitted.costs.contains_key(*r) && !unseen_index.contains_key(r) {
                if !self.descriptor.scores_unseen {
                    return Err(AdapterError::UnknownRecord(r.to_vec()));
                }
                unseen_index.insert(r, unseen.len());
                unseen.push(r);
            }
        }
        let extra = if unseen.is_empty() {
            Vec::new()
        } else {
            let fit_rows: Vec<&[u32]> = fitted.rows.iter().map(Vec::as_slice).collect();
            let response = self.invoke(&fit_rows, &unseen)?;
            response.icosts[fit_rows.len()..].to_vec()
        };
        Ok(records
            .iter()
            .map(|r| match fitted.costs.get(*r) {
                Some(&c) => c,
                None => extra[unseen_index[r]],
            })
            .collect())
    }

    fn invoke(&self, fit: &[&[u32]], score: &[&[u32]]) -> Result<Response> {
        let d = &*self.descriptor;
        let dir = tempfile::Builder::new()
            .prefix("mdlad-extern-")
            .tempdir()
            .map_err(|source| AdapterError::Io {
                path: std::env::temp_dir(),
                source,
            })?;
        let request = dir.path().join("request.txt");
        let response = dir.path().join("response.txt");
        let stderr_path = dir.path().join("stderr.txt");
        let io = |path: &Path| {
            let path = path.to_owned();
            move |source| AdapterError::Io { path, source }
        };

        let mut text = String::new();
        protocol::write_request(&mut text, self.arities.len(), fit, score);
        fs::write(&request, text).map_err(io(&request))?;

        let arities = self
            .arities
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let request_s = request.to_string_lossy();
        let response_s = response.to_string_lossy();
        let args = d.args.iter().map(|a| {
            a.replace("{request}", &request_s)
                .replace("{response}", &response_s)
                .replace("{arities}", &arities)
        });
        let stderr_file = File::create(&stderr_path).map_err(io(&stderr_path))?;
        let mut child = Command::new(&d.command)
            .args(args)
            .current_dir(d.working_dir.as_deref().unwrap_or(dir.path()))
            .env(ENV_REQUEST, &request)
            .env(ENV_RESPONSE, &response)
            .env(ENV_ARITIES, &arities)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(stderr_file)
            .spawn()
            .map_err(|source| AdapterError::Spawn {
                command: d.command.clone(),
                source,
            })?;

        let waited = child
            .wait_timeout(Duration::from_secs_f64(d.timeout_secs))
            .map_err(io(Path::new(&d.command)))?;
        let read_stderr = || fs::read_to_string(&stderr_path).unwrap_or_default();
        let status = match waited {
            Some(status) => status,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(AdapterError::Timeout {
                    secs: d.timeout_secs,
                    stderr: read_stderr(),
                });
            }
        };
        if !status.success() {
            return Err(AdapterError::Failed {
                status: status.to_string(),
                stderr: read_stderr(),
            });
        }
        let body = fs::read_to_string(&response).map_err(|e| AdapterError::Malformed {
            line: 0,
            content: String::new(),
            reason: format!("cannot read response file: {e}"),
            stderr: read_stderr(),
        })?;
        protocol::parse_response(&body, fit.len() + score.len()).map_err(|e| match e {
            AdapterError::Malformed {
                line,
                content,
                reason,
                ..
            } => AdapterError::Malformed {
                line,
                content,
                reason,
                stderr: read_stderr(),
            },
            other => other,
        })
    }
}

fn backend(e: AdapterError) -> mdlad_core::Error {
    mdlad_core::Error::Backend(e.to_string())
}

impl Hypothesis for ExternModelHandle {
    type Item = [u32];

    /// Infinite for an unfitted handle: no model has been described.
    fn hypothesis_cost(&self) -> f64 {
        self.hypothesis_cost_bits().unwrap_or(f64::INFINITY)
    }

    fn item_cost(&self, x: &[u32]) -> mdlad_core::Result<f64> {
        ExternModelHandle::item_cost(self, x).map_err(backend)
    }

    fn item_costs(&self, xs: &[&[u32]]) -> mdlad_core::Result<Vec<f64>> {
        ExternModelHandle::item_costs(self, xs).map_err(backend)
    }
}

/// Fits a fresh [`ExternModelHandle`] per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternLearner {
    pub descriptor: Arc<Descriptor>,
    pub arities: Vec<u32>,
}

impl ExternLearner {
    pub fn new(descriptor: Descriptor, arities: Vec<u32>) -> Self {
        Self {
            descriptor: Arc::new(descriptor),
            arities,
        }
    }

    pub fn fit_handle(&self, sample: &[&[u32]]) -> Result<ExternModelHandle> {
        let mut h = ExternModelHandle::new(Arc::clone(&self.descriptor), self.arities.clone());
        h.fit(sample)?;
        Ok(h)
    }
}

impl Learner for ExternLearner {
    type Item = [u32];
    type Hypothesis = ExternModelHandle;

    fn fit(&self, sample: &[&[u32]]) -> mdlad_core::Result<ExternModelHandle> {
        self.fit_handle(sample).map_err(backend)
    }
}
