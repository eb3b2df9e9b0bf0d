//! Independent oracles and dataset builders for the test suites. Everything
//! here deliberately avoids the implementation paths it is used to check:
//! the eigensolver is cyclic Jacobi (not power iteration), gradients come
//! from central finite differences (not the analytic forms), and the
//! high-precision arithmetic is double-double (not plain f64).

use chb_core::data::{FederatedDataset, Provenance, SeededRng};
use chb_core::models::Sample;

pub mod dd;

/// Central finite differences of `f` at `theta` with per-coordinate step
/// `1e-6·(1+|θ_i|)`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, theta: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; theta.len()];
    let mut probe = theta.to_vec();
    for i in 0..theta.len() {
        let h = 1e-6 * (1.0 + theta[i].abs());
        probe[i] = theta[i] + h;
        let up = f(&probe);
        probe[i] = theta[i] - h;
        let down = f(&probe);
        probe[i] = theta[i];
        g[i] = (up - down) / (2.0 * h);
    }
    g
}

/// Relative L2 error between a gradient and its finite-difference oracle.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(1e-12)
}

/// All eigenvalues of a symmetric matrix by the cyclic Jacobi method,
/// ascending. Brute force: O(n³) per sweep, fine for the small matrices the
/// oracles need.
pub fn jacobi_eigenvalues(mat: &[Vec<f64>]) -> Vec<f64> {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(1e-300);
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p][p];
                let aqq = a[q][q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p][i];
                    let aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Orthonormal d×d basis via modified Gram-Schmidt on seeded normal entries.
pub fn mgs_orthonormal(d: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.next_normal()).collect())
        .collect();
    for j in 0..d {
        for k in 0..j {
            let proj: f64 = (0..d).map(|i| cols[j][i] * cols[k][i]).sum();
            for i in 0..d {
                cols[j][i] -= proj * cols[k][i];
            }
        }
        let norm: f64 = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in cols[j].iter_mut() {
            *v /= norm;
        }
    }
    cols
}

/// Feature matrix `Q·diag(values)·Qᵀ` whose Gram spectrum is exactly
/// `values²`, with ±1 labels, partitioned contiguously over `m` workers.
/// Gives precise control of the pooled condition number.
pub fn spectrum_dataset(values: &[f64], m: usize, seed: u64) -> FederatedDataset {
    let d = values.len();
    let parent = SeededRng::new(seed);
    let mut rng = parent.substream(17);
    let q = mgs_orthonormal(d, &mut rng);
    // X[i][j] = Σ_k Q[i][k]·values[k]·Q[j][k]  (rows are samples)
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = vec![0.0; d];
        for (k, val) in values.iter().enumerate() {
            let c = q[k][i] * val;
            for (j, x) in row.iter_mut().enumerate() {
                *x += c * q[k][j];
            }
        }
        rows.push(row);
    }
    let mut labels_rng = parent.substream(23);
    let samples: Vec<Sample> =
        rows.into_iter().map(|r| Sample::new(r, labels_rng.next_pm1())).collect();
    let base = d / m;
    let extra = d % m;
    let mut shards = Vec::with_capacity(m);
    let mut it = samples.into_iter();
    for w in 0..m {
        let take = base + usize::from(w < extra);
        shards.push(it.by_ref().take(take).collect());
    }
    FederatedDataset::from_shards(
        d,
        shards,
        Provenance::Custom(format!("spectrum;d:{d};m:{m};seed:{seed}")),
    )
}

/// Rank-deficient least-squares problem: `rank` informative feature columns
/// out of `d` (the rest exactly zero), with labels that are exactly fittable
/// on the informative block, so `f* = 0`. The restricted spectrum is
/// `values²`.
pub fn rank_deficient_dataset(values: &[f64], d: usize, m: usize, seed: u64) -> FederatedDataset {
    let rank = values.len();
    assert!(rank <= d);
    let inner = spectrum_dataset(values, 1, seed);
    let samples: Vec<Sample> = inner.shards[0]
        .iter()
        .map(|s| {
            let mut features = vec![0.0; d];
            features[..rank].copy_from_slice(&s.features);
            Sample::new(features, s.label)
        })
        .collect();
    let base = samples.len() / m;
    let extra = samples.len() % m;
    let mut shards = Vec::with_capacity(m);
    let mut it = samples.into_iter();
    for w in 0..m {
        let take = base + usize::from(w < extra);
        shards.push(it.by_ref().take(take).collect());
    }
    FederatedDataset::from_shards(
        d,
        shards,
        Provenance::Custom(format!("rank-deficient;d:{d};rank:{rank};m:{m};seed:{seed}")),
    )
}

/// Random dense samples for gradient checks.
pub fn random_shard(n: usize, d: usize, rng: &mut SeededRng) -> Vec<Sample> {
    (0..n)
        .map(|_| {
            let features = (0..d).map(|_| rng.next_normal()).collect();
            Sample::new(features, rng.next_pm1())
        })
        .collect()
}

/// Random parameter vector with every coordinate bounded away from zero
/// (keeps lasso subgradients and finite differences on one side of the kink).
pub fn random_theta_no_zeros(d: usize, rng: &mut SeededRng) -> Vec<f64> {
    (0..d)
        .map(|_| {
            let v = rng.next_normal();
            v + 0.05 * if v >= 0.0 { 1.0 } else { -1.0 }
        })
        .collect()
}

/// Pooled Gram matrix Σ x xᵀ as dense rows, for feeding the Jacobi oracle.
pub fn pooled_gram(fed: &FederatedDataset) -> Vec<Vec<f64>> {
    let d = fed.d;
    let mut gram = vec![vec![0.0; d]; d];
    for shard in &fed.shards {
        for s in shard {
            for i in 0..d {
                for j in 0..d {
                    gram[i][j] += s.features[i] * s.features[j];
                }
            }
        }
    }
    gram
}
