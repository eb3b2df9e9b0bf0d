//! Datasets: LIBSVM-format parsing, contiguous sharding across workers, and
//! seeded synthetic generation with controlled per-worker smoothness
//! constants.
//!
//! Every operation is a pure function of its inputs and an explicit seed, so
//! a dataset is fully determined by its recorded provenance.

use crate::linalg::{self, SquareMat};
use crate::models::Sample;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use thiserror::Error;

/// Identity string of the generator, recorded in trace metadata so that a
/// trace names the exact byte stream that produced its dataset.
pub const RNG_IDENTITY: &str = "splitmix64-v1";

/// Counter-based 64-bit generator (splitmix64). The k-th output is a fixed
/// avalanche hash of `seed + k·γ`, so substreams can be split off without
/// sharing state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededRng {
    state: u64,
}

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in the open interval (0, 1): never 0, safe under `ln`.
    pub fn next_f64(&mut self) -> f64 {
        (((self.next_u64() >> 11) as f64) + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Uniform in [-s, +s].
    pub fn next_uniform_symmetric(&mut self, s: f64) -> f64 {
        s * (2.0 * self.next_f64() - 1.0)
    }

    /// Standard normal via Box-Muller (one draw per uniform pair).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Label in {-1, +1} with equal probability.
    pub fn next_pm1(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Independent substream for index `i` (e.g. one per worker). Disjoint
    /// from the parent stream for all practical purposes: the child seed is a
    /// hash of (parent state, i).
    pub fn substream(&self, i: u64) -> SeededRng {
        SeededRng::new(mix64(self.state ^ mix64(i.wrapping_add(1).wrapping_mul(GAMMA))))
    }
}

/// Where a dataset came from; with the seed this determines it completely.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    SyntheticControlled { task: &'static str, m: usize, d: usize, targets: String, seed: u64 },
    SyntheticGaussian { m: usize, d: usize, n_total: usize, seed: u64 },
    File { path: String, policy: &'static str, seed: u64 },
    Custom(String),
}

impl Provenance {
    /// Single-line form for trace metadata (no '=' or newline characters).
    pub fn describe(&self) -> String {
        match self {
            Provenance::SyntheticControlled { task, m, d, targets, seed } => {
                format!("synthetic-controlled;task:{task};m:{m};d:{d};targets:{targets};seed:{seed}")
            }
            Provenance::SyntheticGaussian { m, d, n_total, seed } => {
                format!("synthetic-gaussian;m:{m};d:{d};n:{n_total};seed:{seed}")
            }
            Provenance::File { path, policy, seed } => {
                format!("file;path:{path};policy:{policy};seed:{seed}")
            }
            Provenance::Custom(s) => s.clone(),
        }
    }
}

/// `M` worker shards of labeled samples plus the global feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FederatedDataset {
    pub d: usize,
    pub shards: Vec<Vec<Sample>>,
    pub provenance: Provenance,
}

impl FederatedDataset {
    pub fn from_shards(d: usize, shards: Vec<Vec<Sample>>, provenance: Provenance) -> Self {
        Self { d, shards, provenance }
    }

    pub fn workers(&self) -> usize {
        self.shards.len()
    }

    pub fn n_total(&self) -> usize {
        self.shards.iter().map(|s| s.len()).sum()
    }

    /// All samples in shard order (worker 0 first).
    pub fn pooled(&self) -> Vec<Sample> {
        self.shards.iter().flat_map(|s| s.iter().cloned()).collect()
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("empty dataset")]
    Empty,
    #[error("cannot split {n} samples across {m} workers: a shard would be empty")]
    DegenerateShard { n: usize, m: usize },
    #[error("invalid parameter: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// LIBSVM text format: `<label> <index>:<value> ...`, 1-based strictly
// increasing indices, zeros omitted. LF or CRLF accepted.
// ---------------------------------------------------------------------------

/// Parse a LIBSVM stream into dense samples. The dimension is
/// `max(d_hint, largest index seen)`; unlisted indices are 0.
pub fn parse_libsvm(
    reader: impl BufRead,
    d_hint: Option<usize>,
) -> Result<(Vec<Sample>, usize), DataError> {
    let mut rows: Vec<(f64, Vec<(usize, f64)>)> = Vec::new();
    let mut max_index = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().ok_or(DataError::Parse {
            line: lineno,
            msg: "empty line".into(),
        })?;
        let label: f64 = label_tok.parse().map_err(|_| DataError::Parse {
            line: lineno,
            msg: format!("bad label `{label_tok}`"),
        })?;
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        let mut prev_index = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or(DataError::Parse {
                line: lineno,
                msg: format!("expected index:value, got `{tok}`"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| DataError::Parse {
                line: lineno,
                msg: format!("bad index `{idx_s}`"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| DataError::Parse {
                line: lineno,
                msg: format!("bad value `{val_s}`"),
            })?;
            if idx == 0 {
                return Err(DataError::Parse { line: lineno, msg: "index 0 (indices are 1-based)".into() });
            }
            if idx <= prev_index {
                return Err(DataError::Parse {
                    line: lineno,
                    msg: format!("index {idx} not strictly increasing after {prev_index}"),
                });
            }
            prev_index = idx;
            pairs.push((idx, val));
        }
        max_index = max_index.max(prev_index);
        rows.push((label, pairs));
    }
    if rows.is_empty() {
        return Err(DataError::Empty);
    }
    let d = max_index.max(d_hint.unwrap_or(0));
    let samples = rows
        .into_iter()
        .map(|(label, pairs)| {
            let mut features = vec![0.0; d];
            for (idx, val) in pairs {
                features[idx - 1] = val;
            }
            Sample::new(features, label)
        })
        .collect();
    Ok((samples, d))
}

/// Write samples in LIBSVM text form, omitting exact zeros. Labels and values
/// use shortest round-trip formatting, so re-parsing reproduces the samples
/// exactly.
pub fn write_libsvm(samples: &[Sample], mut w: impl Write) -> Result<(), DataError> {
    let mut line = String::new();
    for s in samples {
        line.clear();
        write!(line, "{}", s.label).expect("write to string");
        for (i, v) in s.features.iter().enumerate() {
            if *v != 0.0 {
                write!(line, " {}:{}", i + 1, v).expect("write to string");
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Sharding.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionPolicy {
    /// Consecutive samples in file order; the first `N mod M` shards get one
    /// extra sample. No shuffling.
    ContiguousEven,
}

impl PartitionPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            PartitionPolicy::ContiguousEven => "contiguous-even",
        }
    }
}

/// Split samples across `m` workers.
pub fn partition(
    samples: Vec<Sample>,
    m: usize,
    policy: PartitionPolicy,
    source: &str,
    seed: &SeededRng,
) -> Result<FederatedDataset, DataError> {
    if samples.is_empty() {
        return Err(DataError::Empty);
    }
    let n = samples.len();
    if m == 0 || m > n {
        return Err(DataError::DegenerateShard { n, m });
    }
    let d = samples[0].features.len();
    let base = n / m;
    let extra = n % m;
    let mut shards = Vec::with_capacity(m);
    let mut it = samples.into_iter();
    for w in 0..m {
        let take = base + usize::from(w < extra);
        shards.push(it.by_ref().take(take).collect());
    }
    Ok(FederatedDataset::from_shards(
        d,
        shards,
        Provenance::File { path: source.to_string(), policy: policy.name(), seed: seed.state },
    ))
}

// ---------------------------------------------------------------------------
// Synthetic datasets.
// ---------------------------------------------------------------------------

/// Per-worker smoothness targets.
#[derive(Debug, Clone, PartialEq)]
pub enum SmoothnessTargets {
    PerWorker(Vec<f64>),
    Common(f64),
}

impl SmoothnessTargets {
    fn resolve(&self, m: usize) -> Result<Vec<f64>, DataError> {
        let v = match self {
            SmoothnessTargets::PerWorker(v) => {
                if v.len() != m {
                    return Err(DataError::Validation(format!(
                        "{} targets for {} workers",
                        v.len(),
                        m
                    )));
                }
                v.clone()
            }
            SmoothnessTargets::Common(l) => vec![*l; m],
        };
        if v.iter().any(|l| !(*l > 0.0)) {
            return Err(DataError::Validation("smoothness targets must be positive".into()));
        }
        Ok(v)
    }

    fn describe(&self) -> String {
        match self {
            SmoothnessTargets::PerWorker(v) => {
                let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                parts.join(",")
            }
            SmoothnessTargets::Common(l) => format!("common:{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthTask {
    Linear,
    Logistic,
}

/// Synthetic dataset whose per-worker smoothness constants hit the given
/// targets exactly (to power-iteration precision).
///
/// Per worker: labels are ±1 with equal probability; a d×d standard-normal
/// matrix is orthonormalized (QR) to `Q`, a diagonal `Λ` is linearly spaced
/// over `[-s, s]`, and the feature rows are `Q Λ Qᵀ`. For the linear task
/// `s = √L_m` makes `λ_max(Σ x xᵀ) = L_m`; for logistic, `s = 2√(L_m − λ)`
/// makes `λ + λ_max(0.25 Σ y² x xᵀ) = L_m`.
///
/// The construction produces exactly `d` samples per worker, so
/// `n_per_worker` must equal `d`.
pub fn synth_controlled(
    m: usize,
    d: usize,
    n_per_worker: usize,
    targets: &SmoothnessTargets,
    task: SynthTask,
    lambda: f64,
    seed: &SeededRng,
) -> Result<FederatedDataset, DataError> {
    if m == 0 {
        return Err(DataError::Validation("need at least one worker".into()));
    }
    if d < 2 {
        return Err(DataError::Validation("need dimension at least 2".into()));
    }
    if n_per_worker != d {
        return Err(DataError::Validation(format!(
            "controlled-smoothness construction yields exactly d samples per worker (requested n={n_per_worker}, d={d})"
        )));
    }
    let target_values = targets.resolve(m)?;
    let mut shards = Vec::with_capacity(m);
    for (worker, &target) in target_values.iter().enumerate() {
        let mut rng = seed.substream(worker as u64);
        let labels: Vec<f64> = (0..d).map(|_| rng.next_pm1()).collect();
        let s = match task {
            SynthTask::Linear => target.sqrt(),
            SynthTask::Logistic => {
                if target <= lambda {
                    return Err(DataError::Validation(format!(
                        "logistic target {target} must exceed lambda {lambda}"
                    )));
                }
                2.0 * (target - lambda).sqrt()
            }
        };
        let a = SquareMat::from_fn(d, |_, _| rng.next_normal());
        let q = linalg::householder_q(&a);
        let lam = linalg::linspace(-s, s, d);
        // X = Q Λ Qᵀ, rows are the samples.
        let qt = q.transpose();
        let mut scaled = qt.clone();
        for (i, l) in lam.iter().enumerate() {
            for j in 0..d {
                let v = scaled.at(i, j) * l;
                scaled.set(i, j, v);
            }
        }
        let x = q.matmul(&scaled);
        let shard: Vec<Sample> = (0..d)
            .map(|i| Sample::new(x.row(i).to_vec(), labels[i]))
            .collect();
        shards.push(shard);
    }
    Ok(FederatedDataset::from_shards(
        d,
        shards,
        Provenance::SyntheticControlled {
            task: match task {
                SynthTask::Linear => "linear",
                SynthTask::Logistic => "logistic",
            },
            m,
            d,
            targets: targets.describe(),
            seed: seed.state,
        },
    ))
}

/// Plain standard-normal features with ±1 labels, split contiguously across
/// workers. No smoothness control; used for the MLP task.
pub fn synth_gaussian(
    m: usize,
    d: usize,
    n_total: usize,
    seed: &SeededRng,
) -> Result<FederatedDataset, DataError> {
    if n_total == 0 {
        return Err(DataError::Empty);
    }
    if m == 0 || m > n_total {
        return Err(DataError::DegenerateShard { n: n_total, m });
    }
    let mut rng = seed.substream(0);
    let samples: Vec<Sample> = (0..n_total)
        .map(|_| {
            let label = rng.next_pm1();
            let features = (0..d).map(|_| rng.next_normal()).collect();
            Sample::new(features, label)
        })
        .collect();
    let mut fed = partition(samples, m, PartitionPolicy::ContiguousEven, "synthetic", seed)?;
    fed.provenance = Provenance::SyntheticGaussian { m, d, n_total, seed: seed.state };
    Ok(fed)
}
