//! The server-worker protocol: broadcast, per-worker censoring decision,
//! innovation transmission, recursive aggregation, and the parameter-update
//! rules for the four algorithms.
//!
//! One iteration k: the server broadcasts θ^k; every worker evaluates its
//! local gradient and the innovation δ = ∇f_m(θ^k) − cached; a censoring
//! worker uploads δ only when ‖δ‖² > ε1‖θ^k − θ^{k−1}‖²; the server folds the
//! received innovations into its running aggregate and takes a heavy-ball
//! step. HB and GD are the no-censoring special case (every worker uploads
//! each iteration), which keeps their arithmetic path identical to the
//! censored algorithms and makes the reduction identities exact in floating
//! point.
//!
//! All reductions over workers run sequentially in ascending worker id; two
//! runs with identical inputs produce identical traces.

use crate::data::{FederatedDataset, SeededRng, RNG_IDENTITY};
use crate::linalg;
use crate::models::{self, LossModel, ModelError, Sample};
use crate::trace::{self, IterationTrace, StopMode, StoppingRule, Trace, TraceError, TraceMeta};
use std::time::Instant;
use thiserror::Error;

/// Norm/objective ceiling beyond which a run is declared diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Censored heavy ball: censoring + momentum.
    Chb,
    /// Classical heavy ball: momentum, every worker transmits.
    Hb,
    /// Gradient descent: no momentum, every worker transmits.
    Gd,
    /// Censoring-based gradient descent (worker-side): censoring, no momentum.
    Lag,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Chb => "chb",
            Algorithm::Hb => "hb",
            Algorithm::Gd => "gd",
            Algorithm::Lag => "lag",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "chb" => Some(Algorithm::Chb),
            "hb" => Some(Algorithm::Hb),
            "gd" => Some(Algorithm::Gd),
            "lag" | "lag-wk" => Some(Algorithm::Lag),
            _ => None,
        }
    }

    /// Whether workers apply the skip-transmission condition.
    pub fn censors(&self) -> bool {
        matches!(self, Algorithm::Chb | Algorithm::Lag)
    }

    /// Whether the server update carries the momentum term.
    pub fn uses_momentum(&self) -> bool {
        matches!(self, Algorithm::Chb | Algorithm::Hb)
    }
}

/// Every constant the update rules and condition calculators use. `rho1..3`
/// are the free positives of the descent conditions; `mu` and `l` are the
/// strong-convexity and smoothness constants (0 = unknown).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    pub alpha: f64,
    pub beta: f64,
    pub eps1: f64,
    pub eta1: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub lambda: f64,
    pub mu: f64,
    pub l: f64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            eps1: 0.0,
            eta1: 0.0,
            rho1: 1.0,
            rho2: 1.0,
            rho3: 1.0,
            lambda: 0.0,
            mu: 0.0,
            l: 0.0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.alpha > 0.0) {
            return Err(EngineError::InvalidParams("alpha must be positive".into()));
        }
        if self.beta < 0.0 || self.eps1 < 0.0 || self.eta1 < 0.0 {
            return Err(EngineError::InvalidParams(
                "beta, eps1 and eta1 must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Worker-side state: the last gradient this worker transmitted and its
/// transmission counter.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerState {
    pub id: usize,
    pub cached_grad: Vec<f64>,
    pub transmissions: u64,
    /// Informational smoothness estimate; not used by the protocol.
    pub l_local: f64,
}

impl WorkerState {
    pub fn new(id: usize, dim: usize) -> Self {
        Self { id, cached_grad: vec![0.0; dim], transmissions: 0, l_local: 0.0 }
    }
}

/// Server-side state between iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ServerState {
    pub theta_curr: Vec<f64>,
    pub theta_prev: Vec<f64>,
    pub agg_grad: Vec<f64>,
    pub k: u64,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid hyperparameters: {0}")]
    InvalidParams(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("diverged at iteration {k} (‖θ‖ = {theta_norm:e})")]
    Diverged { k: u64, theta_norm: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// Skip-transmission condition: true iff `‖innovation‖² ≤ ε1‖θ^k − θ^{k−1}‖²`
/// (skip on equality).
pub fn should_skip(innovation: &[f64], theta_curr: &[f64], theta_prev: &[f64], eps1: f64) -> bool {
    let step_sq = linalg::norm_sq(&linalg::sub(theta_curr, theta_prev));
    linalg::norm_sq(innovation) <= eps1 * step_sq
}

/// Censoring decision given a precomputed local gradient. On transmit the
/// cache moves to `grad` and the counter advances; on skip the state is
/// untouched.
fn decide_and_update(
    ws: &mut WorkerState,
    grad: Vec<f64>,
    theta_curr: &[f64],
    theta_prev: &[f64],
    eps1: f64,
    censoring: bool,
) -> Option<Vec<f64>> {
    let innovation = linalg::sub(&grad, &ws.cached_grad);
    if censoring && should_skip(&innovation, theta_curr, theta_prev, eps1) {
        return None;
    }
    ws.cached_grad = grad;
    ws.transmissions += 1;
    Some(innovation)
}

/// One worker's round: evaluate the local gradient at `theta_curr`, apply the
/// skip condition, and return the innovation if it transmits.
pub fn worker_round(
    ws: &mut WorkerState,
    model: &LossModel,
    shard: &[Sample],
    theta_curr: &[f64],
    theta_prev: &[f64],
    eps1: f64,
) -> Result<(bool, Option<Vec<f64>>), ModelError> {
    let grad = models::eval_gradient(model, theta_curr, shard)?;
    let sent = decide_and_update(ws, grad, theta_curr, theta_prev, eps1, true);
    Ok((sent.is_some(), sent))
}

/// Fold transmitted innovations into the running aggregate:
/// `∇^k = ∇^{k−1} + Σ δ∇_m^k`, summed in ascending worker id.
pub fn server_aggregate(
    agg_prev: &[f64],
    innovations: &[(usize, Vec<f64>)],
) -> Result<Vec<f64>, EngineError> {
    let mut agg = agg_prev.to_vec();
    let mut last_id: Option<usize> = None;
    for (id, delta) in innovations {
        match last_id {
            Some(prev) if *id == prev => {
                return Err(EngineError::ProtocolViolation(format!(
                    "duplicate innovation from worker {id}"
                )));
            }
            Some(prev) if *id < prev => {
                return Err(EngineError::ProtocolViolation(format!(
                    "innovations not in ascending worker order ({id} after {prev})"
                )));
            }
            _ => {}
        }
        last_id = Some(*id);
        if delta.len() != agg.len() {
            return Err(EngineError::ProtocolViolation(format!(
                "innovation of length {} from worker {id}, expected {}",
                delta.len(),
                agg.len()
            )));
        }
        linalg::axpy(&mut agg, 1.0, delta);
    }
    Ok(agg)
}

/// Parameter update `θ^{k+1} = θ^k − α·grad + β(θ^k − θ^{k−1})`; GD and LAG
/// force β = 0. `grad` is the server aggregate for CHB/LAG and the full
/// gradient for HB/GD.
pub fn server_update(
    alg: Algorithm,
    theta_curr: &[f64],
    theta_prev: &[f64],
    grad: &[f64],
    alpha: f64,
    beta: f64,
    k: u64,
) -> Result<Vec<f64>, EngineError> {
    let beta_eff = if alg.uses_momentum() { beta } else { 0.0 };
    let mut next = theta_curr.to_vec();
    linalg::axpy(&mut next, -alpha, grad);
    for i in 0..next.len() {
        next[i] += beta_eff * (theta_curr[i] - theta_prev[i]);
    }
    if next.iter().any(|v| !v.is_finite()) {
        return Err(EngineError::Diverged { k, theta_norm: linalg::norm(theta_curr) });
    }
    Ok(next)
}

/// Where f* for gap reporting comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FStar {
    /// A value fixed before the run (from the f* oracle), with its method tag.
    Known { value: f64, method: String },
    /// Report gaps against the best objective seen across the whole run
    /// (fixed-iteration experiments). Incompatible with target-gap stopping.
    BestSeen,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep θ^k per iteration in the returned trace (memory-heavy).
    pub record_params: bool,
}

/// Run one algorithm to completion. Deterministic: identical inputs produce
/// identical traces. On divergence the partial trace is returned with its
/// `diverged` flag set.
#[allow(clippy::too_many_arguments)]
pub fn run_experiment(
    alg: Algorithm,
    params: &HyperParams,
    model: &LossModel,
    fed: &FederatedDataset,
    stop: &StoppingRule,
    f_star: &FStar,
    seed: u64,
    options: RunOptions,
) -> Result<Trace, EngineError> {
    params.validate()?;
    let m = fed.workers();
    if m == 0 {
        return Err(EngineError::InvalidParams("dataset has no workers".into()));
    }
    if matches!(stop.mode, StopMode::TargetGap(_)) && matches!(f_star, FStar::BestSeen) {
        return Err(EngineError::InvalidParams(
            "target-gap stopping needs a known f_star".into(),
        ));
    }
    let dim = model.param_len(fed.d);
    let mut init_rng = SeededRng::new(seed).substream(0x5eed_1417);
    let theta0 = model.init_params(fed.d, &mut init_rng);
    if theta0.len() != dim {
        return Err(EngineError::InvalidParams("model/dataset dimension mismatch".into()));
    }

    let (f_ref, f_method) = match f_star {
        FStar::Known { value, method } => (Some(*value), method.clone()),
        FStar::BestSeen => (None, "best-seen".to_string()),
    };

    let mut server = ServerState {
        theta_curr: theta0.clone(),
        // θ^0 := θ^1 so the momentum term vanishes at k = 1.
        theta_prev: theta0,
        agg_grad: vec![0.0; dim],
        k: 0,
    };
    let mut workers: Vec<WorkerState> = (0..m).map(|id| WorkerState::new(id, dim)).collect();

    let meta = TraceMeta {
        algorithm: alg.name().to_string(),
        seed,
        rng: RNG_IDENTITY.to_string(),
        params: *params,
        m,
        d: fed.d,
        dataset: fed.provenance.describe(),
        f_star: f_ref.unwrap_or(f64::NAN),
        f_star_method: f_method,
        stop: stop.describe(),
        diverged: false,
    };
    let mut out = Trace::new(meta);
    let started = Instant::now();

    for k in 1..=stop.max_k {
        server.k = k;
        let mut objective = 0.0;
        let mut true_grad = vec![0.0; dim];
        let mut innovations: Vec<(usize, Vec<f64>)> = Vec::new();
        let mut flags = vec![false; m];
        for ws in workers.iter_mut() {
            let shard = &fed.shards[ws.id];
            objective += models::eval_loss(model, &server.theta_curr, shard)?;
            let grad = models::eval_gradient(model, &server.theta_curr, shard)?;
            linalg::axpy(&mut true_grad, 1.0, &grad);
            if let Some(delta) = decide_and_update(
                ws,
                grad,
                &server.theta_curr,
                &server.theta_prev,
                params.eps1,
                alg.censors(),
            ) {
                flags[ws.id] = true;
                innovations.push((ws.id, delta));
            }
        }
        server.agg_grad = server_aggregate(&server.agg_grad, &innovations)?;

        let step_norm_sq = linalg::norm_sq(&linalg::sub(&server.theta_curr, &server.theta_prev));
        let (f_gap, lyapunov) = match f_ref {
            Some(v) => {
                let gap = objective - v;
                (gap, gap + params.eta1 * step_norm_sq)
            }
            // Filled in after the run against the best objective seen.
            None => (f64::NAN, f64::NAN),
        };
        let rec = IterationTrace {
            k,
            objective,
            f_gap,
            grad_norm_sq: linalg::norm_sq(&true_grad),
            agg_grad_norm_sq: linalg::norm_sq(&server.agg_grad),
            lyapunov,
            comms_this_iter: innovations.len() as u32,
            comms_cumulative: 0,
            transmit_flags: flags,
            step_norm_sq,
            wallclock_ns: started.elapsed().as_nanos() as u64,
        };
        if options.record_params {
            out.theta_history.push(server.theta_curr.clone());
        }
        let stop_now = trace::should_stop(stop, &rec);
        trace::append(&mut out, rec)?;

        if !objective.is_finite() || objective > DIVERGENCE_LIMIT {
            out.meta.diverged = true;
            break;
        }
        if stop_now {
            break;
        }
        let next = match server_update(
            alg,
            &server.theta_curr,
            &server.theta_prev,
            &server.agg_grad,
            params.alpha,
            params.beta,
            k,
        ) {
            Ok(next) => next,
            Err(EngineError::Diverged { .. }) => {
                out.meta.diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if linalg::norm(&next) > DIVERGENCE_LIMIT {
            out.meta.diverged = true;
            break;
        }
        server.theta_prev = std::mem::replace(&mut server.theta_curr, next);
    }

    if f_ref.is_none() {
        let best = out.records.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
        out.meta.f_star = best;
        for r in &mut out.records {
            r.f_gap = r.objective - best;
            r.lyapunov = r.f_gap + params.eta1 * r.step_norm_sq;
        }
    }
    Ok(out)
}

/// Relative drift between the recursive aggregate and a from-scratch
/// recomputation `Σ_m cached_grad` — the bookkeeping audit for the running
/// sum. Returns `‖agg − Σ cached‖ / max(‖Σ cached‖, 1e-300)`.
pub fn aggregate_drift(server: &ServerState, workers: &[WorkerState]) -> f64 {
    let mut fresh = vec![0.0; server.agg_grad.len()];
    for ws in workers {
        linalg::axpy(&mut fresh, 1.0, &ws.cached_grad);
    }
    let diff = linalg::sub(&server.agg_grad, &fresh);
    linalg::norm(&diff) / linalg::norm(&fresh).max(1e-300)
}
