//! Line-oriented `key = value` experiment configs with `#` comments.
//!
//! Step size and censoring threshold accept the symbolic forms `1/L`, `c/L`
//! and `c/(alpha^2*M^2)` in addition to literal reals; symbols resolve after
//! the dataset's smoothness constant is estimated.

use chb_core::data::SmoothnessTargets;
use chb_core::engine::Algorithm;
use chb_core::models::{ModelKind, DEFAULT_MLP_HIDDEN};
use chb_core::trace::StoppingRule;
use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "config line {}: {}", self.line, self.msg)
        } else {
            write!(f, "config: {}", self.msg)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, msg: msg.into() })
}

/// A value that may depend on quantities known only after data loading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbolic {
    Literal(f64),
    /// `c/L`, resolved once the global smoothness constant is known.
    OverL(f64),
    /// `c/(alpha^2*M^2)`, resolved once α is known.
    OverAlphaSqM2(f64),
}

impl Symbolic {
    fn parse(line: usize, s: &str) -> Result<Self, ConfigError> {
        let t = s.trim();
        if let Some(num) = t.strip_suffix("/L") {
            let c: f64 = match num.trim().parse() {
                Ok(c) => c,
                Err(_) => return err(line, format!("bad coefficient in `{t}`")),
            };
            return Ok(Symbolic::OverL(c));
        }
        if let Some(num) = t.strip_suffix("/(alpha^2*M^2)") {
            let c: f64 = match num.trim().parse() {
                Ok(c) => c,
                Err(_) => return err(line, format!("bad coefficient in `{t}`")),
            };
            return Ok(Symbolic::OverAlphaSqM2(c));
        }
        match t.parse() {
            Ok(v) => Ok(Symbolic::Literal(v)),
            Err(_) => err(line, format!("`{t}` is neither a real nor a supported symbolic form")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    SynthControlled,
    SynthGaussian,
    Libsvm(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eta1Spec {
    /// `(1−αL)/(2α)` clamped at 0 (0 for the MLP task).
    Auto,
    Literal(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FStarSpec {
    /// Oracle choice by task: normal equations for linear, a long reference
    /// run for logistic/lasso, best-seen for the MLP.
    Auto,
    Literal(f64),
    BestSeen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: ModelKind,
    pub data: DataSpec,
    pub m: usize,
    pub d: Option<usize>,
    pub n_total: Option<usize>,
    pub targets: Option<SmoothnessTargets>,
    pub d_hint: Option<usize>,
    pub lambda: f64,
    pub mlp_hidden: usize,
    pub mlp_classes: usize,
    pub algorithms: Vec<Algorithm>,
    pub alpha: Symbolic,
    pub beta: f64,
    pub eps1: Symbolic,
    pub eta1: Eta1Spec,
    pub stop: StoppingRule,
    pub seed: u64,
    pub out: PathBuf,
    pub f_star: FStarSpec,
    pub f_star_budget: u64,
    /// Optional reference (comms, iterations) per algorithm, printed in the
    /// summary for comparison and never asserted.
    pub references: Vec<(Algorithm, u64, u64)>,
}

const DEFAULT_MAX_ITERS: u64 = 200_000;

pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig, ConfigError> {
    let mut task = None;
    let mut data = None;
    let mut m = None;
    let mut d = None;
    let mut n_total = None;
    let mut targets: Option<SmoothnessTargets> = None;
    let mut d_hint = None;
    let mut lambda = 0.0;
    let mut mlp_hidden = DEFAULT_MLP_HIDDEN;
    let mut mlp_classes = 2;
    let mut algorithms = None;
    let mut alpha = None;
    let mut beta = 0.0;
    let mut eps1 = Symbolic::Literal(0.0);
    let mut eta1 = Eta1Spec::Auto;
    let mut stop = None;
    let mut max_iters = DEFAULT_MAX_ITERS;
    let mut seed = 0u64;
    let mut out = PathBuf::from("out");
    let mut f_star = FStarSpec::Auto;
    let mut f_star_budget = chb_core::theory::F_STAR_DEFAULT_BUDGET;
    let mut references = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return err(lineno, "expected `key = value`");
        };
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = |v: &str| -> Result<f64, ConfigError> {
            v.parse().map_err(|_| ConfigError { line: lineno, msg: format!("bad real `{v}`") })
        };
        let parse_usize = |v: &str| -> Result<usize, ConfigError> {
            v.parse().map_err(|_| ConfigError { line: lineno, msg: format!("bad integer `{v}`") })
        };
        match key {
            "task" => {
                task = Some(match value {
                    "linear" => ModelKind::LinearRegression,
                    "logistic" => ModelKind::RidgeLogistic,
                    "lasso" => ModelKind::Lasso,
                    "mlp" => ModelKind::Mlp,
                    other => return err(lineno, format!("unknown task `{other}`")),
                });
            }
            "data" => {
                data = Some(match value {
                    "synth-controlled" => DataSpec::SynthControlled,
                    "synth-gaussian" => DataSpec::SynthGaussian,
                    other => match other.strip_prefix("libsvm:") {
                        Some(path) => {
                            let p = base_dir.join(path.trim());
                            if !p.exists() {
                                return err(lineno, format!("dataset file `{}` not found", p.display()));
                            }
                            DataSpec::Libsvm(p)
                        }
                        None => return err(lineno, format!("unknown data spec `{other}`")),
                    },
                });
            }
            "m" => m = Some(parse_usize(value)?),
            "d" => d = Some(parse_usize(value)?),
            "n_total" => n_total = Some(parse_usize(value)?),
            "d_hint" => d_hint = Some(parse_usize(value)?),
            "l_targets" => {
                let vals: Result<Vec<f64>, _> =
                    value.split(',').map(|v| parse_f64(v.trim())).collect();
                targets = Some(SmoothnessTargets::PerWorker(vals?));
            }
            "l_common" => targets = Some(SmoothnessTargets::Common(parse_f64(value)?)),
            "lambda" => lambda = parse_f64(value)?,
            "mlp_hidden" => mlp_hidden = parse_usize(value)?,
            "mlp_classes" => mlp_classes = parse_usize(value)?,
            "algorithms" => {
                let list: Result<Vec<Algorithm>, ConfigError> = value
                    .split(',')
                    .map(|a| {
                        Algorithm::from_name(a.trim()).ok_or(ConfigError {
                            line: lineno,
                            msg: format!("unknown algorithm `{}`", a.trim()),
                        })
                    })
                    .collect();
                algorithms = Some(list?);
            }
            "alpha" => alpha = Some(Symbolic::parse(lineno, value)?),
            "beta" => beta = parse_f64(value)?,
            "eps1" => eps1 = Symbolic::parse(lineno, value)?,
            "eta1" => {
                eta1 = if value == "auto" {
                    Eta1Spec::Auto
                } else {
                    Eta1Spec::Literal(parse_f64(value)?)
                };
            }
            "stop" => {
                let Some((mode, target)) = value.split_once(':') else {
                    return err(lineno, "stop takes `gap:<t>`, `grad:<t>` or `iters:<k>`");
                };
                stop = Some(match mode.trim() {
                    "gap" => (Some(parse_f64(target.trim())?), None, "gap"),
                    "grad" => (Some(parse_f64(target.trim())?), None, "grad"),
                    "iters" => (None, Some(parse_usize(target.trim())? as u64), "iters"),
                    other => return err(lineno, format!("unknown stop mode `{other}`")),
                });
            }
            "max_iters" => max_iters = parse_usize(value)? as u64,
            "seed" => {
                seed = value
                    .parse()
                    .map_err(|_| ConfigError { line: lineno, msg: format!("bad seed `{value}`") })?;
            }
            "out" => out = base_dir.join(value),
            "f_star" => {
                f_star = match value {
                    "auto" => FStarSpec::Auto,
                    "best-seen" => FStarSpec::BestSeen,
                    lit => FStarSpec::Literal(parse_f64(lit)?),
                };
            }
            "f_star_budget" => f_star_budget = parse_usize(value)? as u64,
            "ref_chb" | "ref_hb" | "ref_gd" | "ref_lag" => {
                let alg = Algorithm::from_name(&key[4..]).expect("key prefix checked");
                let Some((comms, iters)) = value.split_once('/') else {
                    return err(lineno, "reference takes `<comms>/<iters>`");
                };
                let c = parse_usize(comms.trim())? as u64;
                let i = parse_usize(iters.trim())? as u64;
                references.push((alg, c, i));
            }
            other => return err(lineno, format!("unknown key `{other}`")),
        }
    }

    let Some(task) = task else { return err(0, "missing key `task`") };
    let Some(data) = data else { return err(0, "missing key `data`") };
    let Some(m) = m else { return err(0, "missing key `m`") };
    let Some(alpha) = alpha else { return err(0, "missing key `alpha`") };
    let algorithms = algorithms.unwrap_or(vec![Algorithm::Chb, Algorithm::Hb, Algorithm::Gd, Algorithm::Lag]);
    let Some((target, iters, mode)) = stop else { return err(0, "missing key `stop`") };
    let stop = match mode {
        "gap" => StoppingRule::target_gap(target.unwrap(), max_iters),
        "grad" => StoppingRule::grad_threshold(target.unwrap(), max_iters),
        _ => StoppingRule::max_iterations(iters.unwrap()),
    };
    match data {
        DataSpec::SynthControlled => {
            if d.is_none() || targets.is_none() {
                return err(0, "synth-controlled needs `d` and `l_targets` or `l_common`");
            }
            if let Some(SmoothnessTargets::PerWorker(v)) = &targets {
                if v.len() != m {
                    return err(0, format!("{} targets for m = {m} workers", v.len()));
                }
            }
        }
        DataSpec::SynthGaussian => {
            if d.is_none() || n_total.is_none() {
                return err(0, "synth-gaussian needs `d` and `n_total`");
            }
        }
        DataSpec::Libsvm(_) => {}
    }
    if task == ModelKind::Mlp {
        if mlp_classes < 2 {
            return err(0, "mlp needs at least two classes");
        }
        if matches!(alpha, Symbolic::OverL(_)) {
            return err(0, "the mlp task has no estimated L; alpha must be a literal");
        }
    }
    Ok(ExperimentConfig {
        task,
        data,
        m,
        d,
        n_total,
        targets,
        d_hint,
        lambda,
        mlp_hidden,
        mlp_classes,
        algorithms,
        alpha,
        beta,
        eps1,
        eta1,
        stop,
        seed,
        out,
        f_star,
        f_star_budget,
        references,
    })
}

impl ExperimentConfig {
    /// Resolve the symbolic step size against the estimated smoothness
    /// constant.
    pub fn resolve_alpha(&self, l: Option<f64>) -> Result<f64, ConfigError> {
        match self.alpha {
            Symbolic::Literal(v) => Ok(v),
            Symbolic::OverL(c) => match l {
                Some(l) if l > 0.0 => Ok(c / l),
                _ => err(0, "alpha = c/L needs a positive estimated L"),
            },
            Symbolic::OverAlphaSqM2(_) => err(0, "alpha cannot reference itself"),
        }
    }

    pub fn resolve_eps1(&self, alpha: f64, l: Option<f64>) -> Result<f64, ConfigError> {
        match self.eps1 {
            Symbolic::Literal(v) => Ok(v),
            Symbolic::OverL(c) => match l {
                Some(l) if l > 0.0 => Ok(c / l),
                _ => err(0, "eps1 = c/L needs a positive estimated L"),
            },
            Symbolic::OverAlphaSqM2(c) => {
                Ok(c / (alpha * alpha * (self.m * self.m) as f64))
            }
        }
    }
}
