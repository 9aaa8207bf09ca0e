use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operator::{frobenius_norm_sq, setup_matvec, to_dense, ColumnOracle};

/// Largest dimension solved with the dense eigensolver.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    Dense,
    Lanczos,
}

/// Leading eigenpair plus what the error metrics need.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub lambda1: f64,
    pub v1: Vec<f64>,
    pub lambda2: f64,
    /// `‖A‖²_F`.
    pub frob_sq: f64,
    /// `min f = ‖A‖²_F − λ₁²`.
    pub fstar: f64,
    pub source: ReferenceSource,
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Number of leading eigenpairs wanted.
    pub nev: usize,
    /// Krylov basis size per cycle.
    pub max_basis: usize,
    /// Residual tolerance relative to `max(1, |θ|)`.
    pub tol: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub start: Option<Vec<f64>>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            nev: 2,
            max_basis: 300,
            tol: 1e-10,
            max_restarts: 50,
            seed: 0,
            start: None,
        }
    }
}

/// Eigenpair `(θ, y)` sorted by descending `θ`.
pub type Eigenpair = (f64, Vec<f64>);

/// Dense path: reads every column, then Householder tridiagonalization
/// with implicit QL/QR (`nalgebra::SymmetricEigen`).
pub fn dense_top_eigenpairs<O: ColumnOracle + ?Sized>(oracle: &O, count: usize) -> Vec<Eigenpair> {
    let eig = to_dense(oracle).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order
        .into_iter()
        .take(count)
        .map(|i| {
            let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            (eig.eigenvalues[i], canonical_sign(v))
        })
        .collect()
}

/// Sign convention: the entry of largest magnitude is positive.
fn canonical_sign(mut v: Vec<f64>) -> Vec<f64> {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    if pivot < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
    v
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|a| *a /= norm);
    }
    norm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Leading `nev` eigenpairs by Lanczos with full reorthogonalization,
/// explicitly restarted from the sum of the wanted Ritz vectors.
pub fn lanczos_top<O: ColumnOracle + ?Sized>(oracle: &O, opts: &LanczosOptions) -> Result<Vec<Eigenpair>> {
    let n = oracle.dim();
    let nev = opts.nev.min(n).max(1);
    let max_basis = opts.max_basis.min(n).max(nev + 1).min(n);
    let mut start = match &opts.start {
        Some(s) if s.len() == n => s.clone(),
        Some(s) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len(),
            })
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
        }
    };
    for _ in 0..=opts.max_restarts {
        if normalize(&mut start) == 0.0 {
            return Err(Error::Undefined("Lanczos start vector is zero"));
        }
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        loop {
            let i = basis.len() - 1;
            let mut w = setup_matvec(oracle, &basis[i]);
            let alpha = dot(&w, &basis[i]);
            for (wk, vk) in w.iter_mut().zip(basis[i].iter()) {
                *wk -= alpha * vk;
            }
            if i > 0 {
                let b = betas[i - 1];
                for (wk, vk) in w.iter_mut().zip(basis[i - 1].iter()) {
                    *wk -= b * vk;
                }
            }
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(&w, v);
                    for (wk, vk) in w.iter_mut().zip(v.iter()) {
                        *wk -= c * vk;
                    }
                }
            }
            alphas.push(alpha);
            let beta = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            let m = alphas.len();
            let scale = alphas.iter().fold(0.0f64, |s, a| s.max(a.abs())).max(1.0);
            let exhausted = beta <= 1e-13 * scale;
            let full = m >= max_basis;
            if m >= nev && (exhausted || full || m.is_multiple_of(10)) {
                let (thetas, vecs) = tridiagonal_eigen(&alphas, &betas);
                let converged = (0..nev).all(|r| {
                    let resid = beta * vecs[(m - 1, r)].abs();
                    resid <= opts.tol * thetas[r].abs().max(1.0)
                });
                if converged || exhausted {
                    return Ok((0..nev)
                        .map(|r| (thetas[r], canonical_sign(ritz_vector(&basis, &vecs, r))))
                        .collect());
                }
                if full {
                    start = vec![0.0; n];
                    for r in 0..nev {
                        let y = ritz_vector(&basis, &vecs, r);
                        start.iter_mut().zip(y.iter()).for_each(|(s, v)| *s += v);
                    }
                    break;
                }
            }
            betas.push(beta);
            w.iter_mut().for_each(|a| *a /= beta);
            basis.push(w);
        }
    }
    Err(Error::NoConvergence {
        what: "Lanczos",
        iterations: opts.max_restarts,
    })
}

/// Eigenpairs of the symmetric tridiagonal matrix, columns sorted by
/// descending eigenvalue.
fn tridiagonal_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let thetas = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m, m, |i, j| eig.eigenvectors[(i, order[j])]);
    (thetas, vecs)
}

fn ritz_vector(basis: &[Vec<f64>], s: &DMatrix<f64>, col: usize) -> Vec<f64> {
    let n = basis[0].len();
    let mut y = vec![0.0; n];
    for (i, v) in basis.iter().enumerate() {
        let c = s[(i, col)];
        y.iter_mut().zip(v.iter()).for_each(|(yk, vk)| *yk += c * vk);
    }
    normalize(&mut y);
    y
}

/// Reference `(λ₁, v₁, λ₂, f*)`: dense for `n ≤ 2000`, Lanczos otherwise.
pub fn reference_eigenpair<O: ColumnOracle + ?Sized>(oracle: &O) -> Result<ReferenceSolution> {
    if oracle.dim() <= DENSE_LIMIT {
        reference_from(oracle, dense_top_eigenpairs(oracle, 2), ReferenceSource::Dense)
    } else {
        reference_lanczos(oracle, &LanczosOptions::default())
    }
}

pub fn reference_lanczos<O: ColumnOracle + ?Sized>(oracle: &O, opts: &LanczosOptions) -> Result<ReferenceSolution> {
    let opts = LanczosOptions {
        nev: opts.nev.max(2),
        ..opts.clone()
    };
    let pairs = lanczos_top(oracle, &opts)?;
    reference_from(oracle, pairs, ReferenceSource::Lanczos)
}

fn reference_from<O: ColumnOracle + ?Sized>(
    oracle: &O,
    pairs: Vec<Eigenpair>,
    source: ReferenceSource,
) -> Result<ReferenceSolution> {
    let mut pairs = pairs.into_iter();
    let (lambda1, v1) = pairs.next().ok_or(Error::Undefined("operator has no eigenpairs"))?;
    let lambda2 = pairs.next().map_or(f64::NEG_INFINITY, |p| p.0);
    if !(lambda1 > 0.0) || !(lambda1 > lambda2) {
        return Err(Error::InvalidSpectrum(format!(
            "need λ₁ > max(0, λ₂), got λ₁ = {lambda1}, λ₂ = {lambda2}"
        )));
    }
    let frob_sq = frobenius_norm_sq(oracle);
    Ok(ReferenceSolution {
        lambda1,
        v1,
        lambda2,
        frob_sq,
        fstar: frob_sq - lambda1 * lambda1,
        source,
    })
}
