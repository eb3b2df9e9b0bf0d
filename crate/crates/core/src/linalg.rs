//! Minimal dense linear algebra on `Vec<f64>`.
//!
//! Everything here is sequential and allocation-explicit so that results are
//! bit-reproducible across runs. Dimensions in this crate stay small (d ≤ 784),
//! so O(d³) factorizations are fine.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += c * x`
pub(crate) fn axpy(y: &mut [f64], c: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for i in 0..y.len() {
        y[i] += c * x[i];
    }
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn scale(a: &mut [f64], c: f64) {
    for x in a.iter_mut() {
        *x *= c;
    }
}

/// `n` points evenly spaced over `[lo, hi]` (endpoints included, n ≥ 2).
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2);
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SquareMat {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SquareMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.at(i, k);
                if a != 0.0 {
                    for j in 0..n {
                        out.data[i * n + j] += a * other.at(k, j);
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.at(j, i))
    }
}

/// Orthonormal factor Q of a Householder QR of `a`, with the sign convention
/// that the diagonal of R is nonnegative (makes Q unique for full-rank input).
pub(crate) fn householder_q(a: &SquareMat) -> SquareMat {
    let n = a.n;
    let mut r = a.clone();
    // Accumulate Q by applying the reflectors to the identity from the left.
    let mut q = SquareMat::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 });
    let mut v = vec![0.0; n];
    for k in 0..n {
        let mut alpha = 0.0;
        for i in k..n {
            alpha += r.at(i, k) * r.at(i, k);
        }
        alpha = alpha.sqrt();
        if alpha == 0.0 {
            continue;
        }
        if r.at(k, k) > 0.0 {
            alpha = -alpha;
        }
        for i in 0..k {
            v[i] = 0.0;
        }
        v[k] = r.at(k, k) - alpha;
        for i in (k + 1)..n {
            v[i] = r.at(i, k);
        }
        let vtv = norm_sq(&v[k..]);
        if vtv == 0.0 {
            continue;
        }
        // r := (I - 2vv^T/v^Tv) r ; q := (I - 2vv^T/v^Tv) q
        for j in k..n {
            let mut w = 0.0;
            for i in k..n {
                w += v[i] * r.at(i, j);
            }
            let c = 2.0 * w / vtv;
            for i in k..n {
                let val = r.at(i, j) - c * v[i];
                r.set(i, j, val);
            }
        }
        for j in 0..n {
            let mut w = 0.0;
            for i in k..n {
                w += v[i] * q.at(i, j);
            }
            let c = 2.0 * w / vtv;
            for i in k..n {
                let val = q.at(i, j) - c * v[i];
                q.set(i, j, val);
            }
        }
    }
    // q currently holds Q^T (product of reflectors applied to I); fix signs so
    // that R's diagonal is nonnegative, then transpose.
    let mut qt = q;
    for k in 0..n {
        if r.at(k, k) < 0.0 {
            for j in 0..n {
                let val = -qt.at(k, j);
                qt.set(k, j, val);
            }
        }
    }
    qt.transpose()
}

/// Rank-revealing Cholesky of a symmetric PSD matrix with diagonal pivoting.
///
/// Returns the pivot order and the lower factor restricted to the numerical
/// rank `r`: `P A P^T ≈ L L^T` with `L` stored as `r` columns of length `n`.
pub(crate) struct PivotedCholesky {
    pub n: usize,
    pub rank: usize,
    pub perm: Vec<usize>,
    /// Column-major: `l[j][i]` is `L[i][j]` in the pivoted ordering, `i ≥ j`.
    pub cols: Vec<Vec<f64>>,
}

pub(crate) fn pivoted_cholesky(a: &SquareMat, tol: f64) -> PivotedCholesky {
    let n = a.n;
    let mut diag: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let max_diag0 = diag.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = tol * max_diag0.max(1e-300);

    for j in 0..n {
        // Pick the largest remaining diagonal entry.
        let (p_rel, &dmax) = diag[j..]
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
        if dmax <= cutoff {
            break;
        }
        let p = j + p_rel;
        perm.swap(j, p);
        diag.swap(j, p);
        for col in cols.iter_mut() {
            col.swap(j, p);
        }
        let mut col = vec![0.0; n];
        let ljj = diag[j].sqrt();
        col[j] = ljj;
        for i in (j + 1)..n {
            let mut v = a.at(perm[i], perm[j]);
            for c in cols.iter() {
                v -= c[i] * c[j];
            }
            col[i] = v / ljj;
            diag[i] -= col[i] * col[i];
        }
        cols.push(col);
    }
    PivotedCholesky { n, rank: cols.len(), perm, cols }
}

impl PivotedCholesky {
    /// Solve `A x = b` in the least-squares sense: free (non-pivot) variables
    /// are set to zero. Exact when `b ∈ range(A)` to within the factor rank.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let r = self.rank;
        // Forward: L y = P b
        let mut y = vec![0.0; r];
        for j in 0..r {
            let mut v = b[self.perm[j]];
            for (k, yk) in y.iter().enumerate().take(j) {
                v -= self.cols[k][j] * yk;
            }
            y[j] = v / self.cols[j][j];
        }
        // Backward: L^T z = y
        let mut z = vec![0.0; r];
        for j in (0..r).rev() {
            let mut v = y[j];
            for k in (j + 1)..r {
                v -= self.cols[j][k] * z[k];
            }
            z[j] = v / self.cols[j][j];
        }
        let mut x = vec![0.0; self.n];
        for j in 0..r {
            x[self.perm[j]] = z[j];
        }
        x
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.n
    }
}
