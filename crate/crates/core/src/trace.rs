//! Per-iteration records, communication accounting, stopping rules, and
//! bit-exact CSV emission.
//!
//! The CSV format is the artifact's external contract: a `# key=value`
//! metadata block, one header row, then one row per iteration. Reals carry 17
//! significant digits so parsing a written trace reproduces every `f64`
//! exactly; output is ASCII with LF line endings. Two runs with identical
//! inputs produce byte-identical files.

use crate::engine::HyperParams;
use std::io::{BufRead, Write};
use thiserror::Error;

/// One iteration of a run. `wallclock_ns` is diagnostic only and is never
/// serialized (it would break byte-identical reruns); `step_norm_sq` is
/// `‖θ^k − θ^{k−1}‖²`, carried for the descent audit and recoverable from the
/// CSV when η1 > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub k: u64,
    /// f(θ^k)
    pub objective: f64,
    /// f(θ^k) − f*
    pub f_gap: f64,
    /// ‖∇f(θ^k)‖² (exact gradient, fresh per-worker sum)
    pub grad_norm_sq: f64,
    /// ‖∇^k‖² (recursive server aggregate)
    pub agg_grad_norm_sq: f64,
    /// f_gap + η1‖θ^k − θ^{k−1}‖²
    pub lyapunov: f64,
    pub comms_this_iter: u32,
    pub comms_cumulative: u64,
    pub transmit_flags: Vec<bool>,
    pub step_norm_sq: f64,
    pub wallclock_ns: u64,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("iteration {got} appended after {expected_prev} (k must increase by 1)")]
    NonMonotone { got: u64, expected_prev: u64 },
    #[error("iteration {k}: comms_this_iter={comms} but {flags} transmit flags are set")]
    FlagMismatch { k: u64, comms: u32, flags: usize },
    #[error("iteration {k}: expected {expected} transmit flags, got {got}")]
    FlagLength { k: u64, expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty trace")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// When to stop a run. `max_k` is always enforced as a backstop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopMode {
    /// Stop once `f_gap ≤ target`.
    TargetGap(f64),
    /// Stop once `‖∇f(θ^k)‖² ≤ target`.
    GradThreshold(f64),
    /// Run exactly `max_k` iterations.
    MaxIterations,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub mode: StopMode,
    pub max_k: u64,
}

impl StoppingRule {
    pub fn target_gap(target: f64, max_k: u64) -> Self {
        Self { mode: StopMode::TargetGap(target), max_k: max_k.max(1) }
    }

    pub fn grad_threshold(target: f64, max_k: u64) -> Self {
        Self { mode: StopMode::GradThreshold(target), max_k: max_k.max(1) }
    }

    pub fn max_iterations(max_k: u64) -> Self {
        Self { mode: StopMode::MaxIterations, max_k: max_k.max(1) }
    }

    pub fn describe(&self) -> String {
        match self.mode {
            StopMode::TargetGap(t) => format!("gap:{};max:{}", fmt_f64(t), self.max_k),
            StopMode::GradThreshold(t) => format!("grad:{};max:{}", fmt_f64(t), self.max_k),
            StopMode::MaxIterations => format!("iters:{}", self.max_k),
        }
    }
}

/// True once `rec` satisfies the rule (or hits the `max_k` backstop).
pub fn should_stop(rule: &StoppingRule, rec: &IterationTrace) -> bool {
    if rec.k >= rule.max_k {
        return true;
    }
    match rule.mode {
        StopMode::TargetGap(t) => rec.f_gap <= t,
        StopMode::GradThreshold(t) => rec.grad_norm_sq <= t,
        StopMode::MaxIterations => false,
    }
}

/// Run metadata carried in the CSV header block.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub algorithm: String,
    pub seed: u64,
    pub rng: String,
    pub params: HyperParams,
    pub m: usize,
    pub d: usize,
    pub dataset: String,
    pub f_star: f64,
    pub f_star_method: String,
    pub stop: String,
    pub diverged: bool,
}

/// A completed (or divergence-aborted) run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub records: Vec<IterationTrace>,
    /// θ^k per iteration, populated only when the run was asked to record it.
    pub theta_history: Vec<Vec<f64>>,
}

impl Trace {
    pub fn new(meta: TraceMeta) -> Self {
        Self { meta, records: Vec::new(), theta_history: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationTrace> {
        self.records.last()
    }

    pub fn total_comms(&self) -> u64 {
        self.records.last().map_or(0, |r| r.comms_cumulative)
    }

    pub fn iterations(&self) -> u64 {
        self.records.last().map_or(0, |r| r.k)
    }

    /// Transmission count of worker `m` over the first `k` iterations.
    pub fn worker_transmissions(&self, m: usize, k: u64) -> u64 {
        self.records
            .iter()
            .filter(|r| r.k <= k)
            .map(|r| u64::from(r.transmit_flags[m]))
            .sum()
    }
}

/// Append `rec`, validating monotone `k`, flag consistency, and recomputing
/// the cumulative communication count.
pub fn append(trace: &mut Trace, mut rec: IterationTrace) -> Result<(), TraceError> {
    let prev_k = trace.records.last().map_or(0, |r| r.k);
    if rec.k != prev_k + 1 {
        return Err(TraceError::NonMonotone { got: rec.k, expected_prev: prev_k });
    }
    if rec.transmit_flags.len() != trace.meta.m {
        return Err(TraceError::FlagLength {
            k: rec.k,
            expected: trace.meta.m,
            got: rec.transmit_flags.len(),
        });
    }
    let set = rec.transmit_flags.iter().filter(|f| **f).count();
    if set != rec.comms_this_iter as usize {
        return Err(TraceError::FlagMismatch { k: rec.k, comms: rec.comms_this_iter, flags: set });
    }
    let prev_cum = trace.records.last().map_or(0, |r| r.comms_cumulative);
    rec.comms_cumulative = prev_cum + u64::from(rec.comms_this_iter);
    trace.records.push(rec);
    Ok(())
}

/// 17 significant digits: round-trip exact for every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub const CSV_HEADER: &str =
    "k,objective,f_gap,grad_norm_sq,agg_grad_norm_sq,lyapunov,comms_iter,comms_cum,flags";

const META_FORMAT: &str = "chb-trace-v1";

/// Emit the trace: `# key=value` metadata lines, the header row, then one row
/// per iteration with flags as a length-M bitstring.
pub fn write_csv(trace: &Trace, mut w: impl Write) -> Result<(), TraceError> {
    if trace.is_empty() {
        return Err(TraceError::Empty);
    }
    let m = &trace.meta;
    let p = &m.params;
    let mut head = String::new();
    for (key, value) in [
        ("format", META_FORMAT.to_string()),
        ("algorithm", m.algorithm.clone()),
        ("seed", m.seed.to_string()),
        ("rng", m.rng.clone()),
        ("alpha", fmt_f64(p.alpha)),
        ("beta", fmt_f64(p.beta)),
        ("eps1", fmt_f64(p.eps1)),
        ("eta1", fmt_f64(p.eta1)),
        ("rho1", fmt_f64(p.rho1)),
        ("rho2", fmt_f64(p.rho2)),
        ("rho3", fmt_f64(p.rho3)),
        ("lambda", fmt_f64(p.lambda)),
        ("mu", fmt_f64(p.mu)),
        ("l", fmt_f64(p.l)),
        ("m", m.m.to_string()),
        ("d", m.d.to_string()),
        ("dataset", m.dataset.clone()),
        ("f_star", fmt_f64(m.f_star)),
        ("f_star_method", m.f_star_method.clone()),
        ("stop", m.stop.clone()),
        ("diverged", m.diverged.to_string()),
    ] {
        head.push_str("# ");
        head.push_str(key);
        head.push('=');
        head.push_str(&value);
        head.push('\n');
    }
    head.push_str(CSV_HEADER);
    head.push('\n');
    w.write_all(head.as_bytes())?;
    let mut line = String::new();
    for r in &trace.records {
        line.clear();
        line.push_str(&r.k.to_string());
        for v in [r.objective, r.f_gap, r.grad_norm_sq, r.agg_grad_norm_sq, r.lyapunov] {
            line.push(',');
            line.push_str(&fmt_f64(v));
        }
        line.push(',');
        line.push_str(&r.comms_this_iter.to_string());
        line.push(',');
        line.push_str(&r.comms_cumulative.to_string());
        line.push(',');
        for f in &r.transmit_flags {
            line.push(if *f { '1' } else { '0' });
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

fn meta_get(map: &[(String, String)], key: &str) -> Result<String, TraceError> {
    map.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.clone())
        .ok_or_else(|| TraceError::Parse { line: 0, msg: format!("missing metadata key `{key}`") })
}

fn meta_f64(map: &[(String, String)], key: &str) -> Result<f64, TraceError> {
    meta_get(map, key)?
        .parse()
        .map_err(|_| TraceError::Parse { line: 0, msg: format!("bad metadata value for `{key}`") })
}

/// Parse a trace written by [`write_csv`]. `wallclock_ns` is not serialized
/// and comes back 0; `step_norm_sq` is recovered from the Lyapunov column
/// when η1 > 0.
pub fn parse_csv(reader: impl BufRead) -> Result<Trace, TraceError> {
    let mut meta_pairs: Vec<(String, String)> = Vec::new();
    let mut records = Vec::new();
    let mut saw_header = false;
    let mut m_workers = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest.split_once('=').ok_or(TraceError::Parse {
                line: lineno,
                msg: "metadata line without `=`".into(),
            })?;
            meta_pairs.push((k.to_string(), v.to_string()));
            continue;
        }
        if !saw_header {
            if line != CSV_HEADER {
                return Err(TraceError::Parse { line: lineno, msg: "unexpected header row".into() });
            }
            saw_header = true;
            m_workers = meta_get(&meta_pairs, "m")?
                .parse()
                .map_err(|_| TraceError::Parse { line: lineno, msg: "bad m".into() })?;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(TraceError::Parse {
                line: lineno,
                msg: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let parse_u = |s: &str| -> Result<u64, TraceError> {
            s.parse().map_err(|_| TraceError::Parse { line: lineno, msg: format!("bad int `{s}`") })
        };
        let parse_r = |s: &str| -> Result<f64, TraceError> {
            s.parse().map_err(|_| TraceError::Parse { line: lineno, msg: format!("bad real `{s}`") })
        };
        let flags_str = fields[8];
        if flags_str.len() != m_workers {
            return Err(TraceError::Parse {
                line: lineno,
                msg: format!("flag string of length {}, expected {}", flags_str.len(), m_workers),
            });
        }
        let transmit_flags: Vec<bool> = flags_str.chars().map(|c| c == '1').collect();
        records.push(IterationTrace {
            k: parse_u(fields[0])?,
            objective: parse_r(fields[1])?,
            f_gap: parse_r(fields[2])?,
            grad_norm_sq: parse_r(fields[3])?,
            agg_grad_norm_sq: parse_r(fields[4])?,
            lyapunov: parse_r(fields[5])?,
            comms_this_iter: parse_u(fields[6])? as u32,
            comms_cumulative: parse_u(fields[7])?,
            transmit_flags,
            step_norm_sq: 0.0,
            wallclock_ns: 0,
        });
    }
    if !saw_header || records.is_empty() {
        return Err(TraceError::Empty);
    }
    let params = HyperParams {
        alpha: meta_f64(&meta_pairs, "alpha")?,
        beta: meta_f64(&meta_pairs, "beta")?,
        eps1: meta_f64(&meta_pairs, "eps1")?,
        eta1: meta_f64(&meta_pairs, "eta1")?,
        rho1: meta_f64(&meta_pairs, "rho1")?,
        rho2: meta_f64(&meta_pairs, "rho2")?,
        rho3: meta_f64(&meta_pairs, "rho3")?,
        lambda: meta_f64(&meta_pairs, "lambda")?,
        mu: meta_f64(&meta_pairs, "mu")?,
        l: meta_f64(&meta_pairs, "l")?,
    };
    let eta1 = params.eta1;
    for r in &mut records {
        if eta1 > 0.0 {
            r.step_norm_sq = (r.lyapunov - r.f_gap) / eta1;
        }
    }
    let meta = TraceMeta {
        algorithm: meta_get(&meta_pairs, "algorithm")?,
        seed: meta_get(&meta_pairs, "seed")?
            .parse()
            .map_err(|_| TraceError::Parse { line: 0, msg: "bad seed".into() })?,
        rng: meta_get(&meta_pairs, "rng")?,
        params,
        m: m_workers,
        d: meta_get(&meta_pairs, "d")?
            .parse()
            .map_err(|_| TraceError::Parse { line: 0, msg: "bad d".into() })?,
        dataset: meta_get(&meta_pairs, "dataset")?,
        f_star: meta_f64(&meta_pairs, "f_star")?,
        f_star_method: meta_get(&meta_pairs, "f_star_method")?,
        stop: meta_get(&meta_pairs, "stop")?,
        diverged: meta_get(&meta_pairs, "diverged")? == "true",
    };
    Ok(Trace { meta, records, theta_history: Vec::new() })
}
