//! Orchestrates a configured experiment: load or generate the dataset,
//! estimate the constants the symbolic hyperparameters need, fix f*, run
//! every requested algorithm, emit one CSV per run, and print a summary
//! table. The four runs share one dataset and one f*; each is independent
//! and deterministic.

use crate::config::{DataSpec, Eta1Spec, ExperimentConfig, FStarSpec};
use chb_core::data::{
    parse_libsvm, partition, synth_controlled, synth_gaussian, FederatedDataset, PartitionPolicy,
    SeededRng, SynthTask,
};
use chb_core::engine::{run_experiment, Algorithm, FStar, HyperParams, RunOptions};
use chb_core::models::{global_smoothness, LossModel, ModelKind};
use chb_core::theory::{self, FStarMethod};
use chb_core::trace::{write_csv, StopMode, Trace};
use std::fmt;
use std::fs;
use std::io::BufReader;

#[derive(Debug)]
pub enum RunError {
    /// Bad configuration or parameterization: exit code 1.
    Config(String),
    /// Dataset loading/generation or file I/O: exit code 2.
    Data(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

pub struct RunOutcome {
    pub any_diverged: bool,
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<FederatedDataset, RunError> {
    let seed = SeededRng::new(cfg.seed);
    match &cfg.data {
        DataSpec::SynthControlled => {
            let d = cfg.d.expect("validated at parse time");
            let task = match cfg.task {
                ModelKind::RidgeLogistic => SynthTask::Logistic,
                ModelKind::LinearRegression | ModelKind::Lasso => SynthTask::Linear,
                ModelKind::Mlp => {
                    return Err(RunError::Config(
                        "controlled-smoothness data applies to linear/logistic/lasso".into(),
                    ))
                }
            };
            let targets = cfg.targets.as_ref().expect("validated at parse time");
            synth_controlled(cfg.m, d, d, targets, task, cfg.lambda, &seed)
                .map_err(|e| RunError::Data(e.to_string()))
        }
        DataSpec::SynthGaussian => {
            let d = cfg.d.expect("validated at parse time");
            let n = cfg.n_total.expect("validated at parse time");
            synth_gaussian(cfg.m, d, n, &seed).map_err(|e| RunError::Data(e.to_string()))
        }
        DataSpec::Libsvm(path) => {
            let file = fs::File::open(path)
                .map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
            let (samples, _d) = parse_libsvm(BufReader::new(file), cfg.d_hint)
                .map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
            partition(
                samples,
                cfg.m,
                PartitionPolicy::ContiguousEven,
                &path.display().to_string(),
                &seed,
            )
            .map_err(|e| RunError::Data(e.to_string()))
        }
    }
}

pub fn build_model(cfg: &ExperimentConfig, d: usize) -> LossModel {
    match cfg.task {
        ModelKind::LinearRegression => LossModel::linear_regression(),
        ModelKind::RidgeLogistic => LossModel::ridge_logistic(cfg.lambda),
        ModelKind::Lasso => LossModel::lasso(cfg.lambda),
        ModelKind::Mlp => LossModel::mlp(d, cfg.mlp_hidden, cfg.mlp_classes, cfg.lambda),
    }
}

/// Resolve everything the run needs once the dataset is in memory.
pub struct Resolved {
    pub fed: FederatedDataset,
    pub model: LossModel,
    pub params: HyperParams,
    pub f_star: FStar,
}

pub fn resolve(cfg: &ExperimentConfig) -> Result<Resolved, RunError> {
    let fed = load_dataset(cfg)?;
    let model = build_model(cfg, fed.d);
    let l = if cfg.task == ModelKind::Mlp {
        None
    } else {
        Some(
            global_smoothness(&model, &fed)
                .map_err(|e| RunError::Data(format!("smoothness estimation failed: {e}")))?,
        )
    };
    let alpha = cfg.resolve_alpha(l).map_err(|e| RunError::Config(e.to_string()))?;
    let eps1 = cfg.resolve_eps1(alpha, l).map_err(|e| RunError::Config(e.to_string()))?;
    let eta1 = match cfg.eta1 {
        Eta1Spec::Literal(v) => v,
        Eta1Spec::Auto => match l {
            Some(l) => ((1.0 - alpha * l) / (2.0 * alpha)).max(0.0),
            None => 0.0,
        },
    };
    let mu = match cfg.task {
        ModelKind::RidgeLogistic => cfg.lambda,
        ModelKind::LinearRegression | ModelKind::Lasso => {
            theory::estimate_mu(&model, &fed).unwrap_or(0.0)
        }
        ModelKind::Mlp => 0.0,
    };
    let params = HyperParams {
        alpha,
        beta: cfg.beta,
        eps1,
        eta1,
        lambda: cfg.lambda,
        mu,
        l: l.unwrap_or(0.0),
        ..HyperParams::default()
    };
    let f_star = match cfg.f_star {
        FStarSpec::Literal(v) => FStar::Known { value: v, method: "config".into() },
        FStarSpec::BestSeen => FStar::BestSeen,
        FStarSpec::Auto => match cfg.task {
            ModelKind::Mlp => FStar::BestSeen,
            ModelKind::LinearRegression => {
                let r = theory::f_star_oracle(&model, &fed, FStarMethod::NormalEquations, cfg.f_star_budget)
                    .map_err(|e| RunError::Config(format!("f_star oracle: {e}")))?;
                FStar::Known { value: r.value, method: r.method }
            }
            ModelKind::RidgeLogistic | ModelKind::Lasso => {
                let r = theory::f_star_oracle(&model, &fed, FStarMethod::LongHb, cfg.f_star_budget)
                    .map_err(|e| RunError::Config(format!("f_star oracle: {e}")))?;
                FStar::Known { value: r.value, method: r.method }
            }
        },
    };
    if matches!(cfg.stop.mode, StopMode::TargetGap(_)) && matches!(f_star, FStar::BestSeen) {
        return Err(RunError::Config(
            "target-gap stopping needs a known f_star (the mlp task reports best-seen)".into(),
        ));
    }
    Ok(Resolved { fed, model, params, f_star })
}

pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutcome, RunError> {
    let resolved = resolve(cfg)?;
    let Resolved { fed, model, params, f_star } = &resolved;
    println!(
        "dataset: {} (m={}, d={}, n={})",
        fed.provenance.describe(),
        fed.workers(),
        fed.d,
        fed.n_total()
    );
    println!(
        "params: alpha={:e} beta={} eps1={:e} eta1={:e} lambda={:e} L={:e} mu={:e}",
        params.alpha, params.beta, params.eps1, params.eta1, params.lambda, params.l, params.mu
    );
    if params.l > 0.0 {
        match theory::condition_report(params, fed.workers()) {
            Ok(rep) => {
                let simplified = theory::check_simplified(params, fed.workers());
                println!(
                    "conditions (informational): sigma0={:e} sigma1(M)={:e} gamma={:e} feasible={} simplified={}",
                    rep.sigma0, rep.sigma1_worst, rep.gamma, rep.feasible, simplified
                );
                if !rep.feasible || !simplified {
                    println!(
                        "note: settings exceed the sufficient descent conditions; runs proceed regardless"
                    );
                }
            }
            Err(e) => println!("conditions unavailable: {e}"),
        }
    }
    if let FStar::Known { value, method } = f_star {
        println!("f_star = {value:e} ({method})");
    } else {
        println!("f_star: best-seen objective (reported post hoc)");
    }

    fs::create_dir_all(&cfg.out)
        .map_err(|e| RunError::Data(format!("{}: {e}", cfg.out.display())))?;
    let mut results: Vec<(Algorithm, Trace)> = Vec::new();
    let mut any_diverged = false;
    for &alg in &cfg.algorithms {
        let trace = run_experiment(
            alg,
            params,
            model,
            fed,
            &cfg.stop,
            f_star,
            cfg.seed,
            RunOptions::default(),
        )
        .map_err(|e| RunError::Config(format!("{}: {e}", alg.name())))?;
        let path = cfg.out.join(format!("{}.csv", alg.name()));
        let file = fs::File::create(&path)
            .map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
        write_csv(&trace, std::io::BufWriter::new(file))
            .map_err(|e| RunError::Data(format!("{}: {e}", path.display())))?;
        if trace.meta.diverged {
            any_diverged = true;
            println!("{}: DIVERGED after {} iterations (partial trace kept)", alg.name(), trace.len());
        }
        results.push((alg, trace));
    }

    print_summary(&results, &cfg.references);
    Ok(RunOutcome { any_diverged })
}

fn print_summary(results: &[(Algorithm, Trace)], references: &[(Algorithm, u64, u64)]) {
    println!();
    println!(
        "{:<6} {:>10} {:>8} {:>24} {:>24} {:>16}",
        "alg", "comms", "iters", "final_objective", "final_grad_norm_sq", "reference"
    );
    for (alg, trace) in results {
        let last = trace.last().expect("runs produce at least one record");
        let reference = references
            .iter()
            .find(|(a, _, _)| a == alg)
            .map(|(_, c, i)| format!("{c}/{i}"))
            .unwrap_or_else(|| "-".to_string());
        let divergence_tag = if trace.meta.diverged { " (diverged)" } else { "" };
        println!(
            "{:<6} {:>10} {:>8} {:>24e} {:>24e} {:>16}{}",
            alg.name(),
            trace.total_comms(),
            trace.iterations(),
            last.objective,
            last.grad_norm_sq,
            reference,
            divergence_tag
        );
    }
}
