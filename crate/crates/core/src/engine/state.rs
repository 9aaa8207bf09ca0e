use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{ColumnBuf, ColumnOracle, ColumnView};

/// Iterate `x` with the cached quantities every strategy reads:
/// `z = A·x`, `ν = ‖x‖²` and `s = xᵀz`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub(crate) x: Vec<f64>,
    pub(crate) z: Vec<f64>,
    pub(crate) nu: f64,
    pub(crate) s: f64,
    pub(crate) iteration: u64,
    pub(crate) column_accesses: u64,
    pub(crate) rng: ChaCha8Rng,
    applies_since_refresh: usize,
    pub(crate) buf: ColumnBuf,
    pub(crate) scratch: Vec<f64>,
}

impl SolverState {
    /// `z = A·x0` accumulated column by column over the nonzero entries of
    /// `x0`; each nonzero costs one column access.
    pub fn new<O: ColumnOracle + ?Sized>(oracle: &O, x0: &[f64], seed: u64) -> Result<Self> {
        let n = oracle.dim();
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.len(),
            });
        }
        let mut z = vec![0.0; n];
        let mut buf = ColumnBuf::new();
        let mut accesses = 0;
        for (j, &xj) in x0.iter().enumerate() {
            if xj != 0.0 {
                oracle.column(j, &mut buf).axpy(xj, &mut z);
                accesses += 1;
            }
        }
        let nu = dot(x0, x0);
        let s = dot(x0, &z);
        Ok(Self {
            x: x0.to_vec(),
            z,
            nu,
            s,
            iteration: 0,
            column_accesses: accesses,
            rng: ChaCha8Rng::seed_from_u64(seed),
            applies_since_refresh: 0,
            buf,
            scratch: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `‖x‖²`; at a global minimizer this equals `λ₁`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `xᵀAx`.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn column_accesses(&self) -> u64 {
        self.column_accesses
    }

    /// `f(x) − f* = λ₁² − 2s + ν²`, free of the `‖A‖²_F` cancellation.
    pub fn objective_gap(&self, lambda1: f64) -> f64 {
        lambda1 * lambda1 - 2.0 * self.s + self.nu * self.nu
    }

    /// `f(x) = ‖A‖²_F − 2s + ν²`.
    pub fn objective(&self, frob_sq: f64) -> f64 {
        frob_sq - 2.0 * self.s + self.nu * self.nu
    }

    /// `x_j += α`, `z += α·A[:, j]` with one metered column read.
    pub fn apply_coordinate_delta<O: ColumnOracle + ?Sized>(&mut self, oracle: &O, j: usize, alpha: f64) {
        let mut buf = std::mem::take(&mut self.buf);
        let col = oracle.column(j, &mut buf);
        self.apply_with_column(j, alpha, oracle.diag(j), col);
        self.buf = buf;
    }

    /// Applies a coordinate delta using a column the caller already read
    /// (and paid for).
    pub(crate) fn apply_with_column(&mut self, j: usize, alpha: f64, a_jj: f64, col: ColumnView<'_>) {
        let xj = self.x[j];
        let zj = self.z[j];
        self.nu += alpha * (2.0 * xj + alpha);
        self.s += alpha * (2.0 * zj + alpha * a_jj);
        self.x[j] = xj + alpha;
        col.axpy(alpha, &mut self.z);
        self.column_accesses += 1;
        self.applies_since_refresh += 1;
        if self.applies_since_refresh >= self.x.len() {
            self.refresh_scalars();
        }
    }

    /// Recomputes `ν` and `s` from `x` and `z` (`O(n)`, no column reads).
    pub fn refresh_scalars(&mut self) {
        self.nu = dot(&self.x, &self.x);
        self.s = dot(&self.x, &self.z);
        self.applies_since_refresh = 0;
    }

    /// Recomputes `z = A·x` through unmetered reads, then `ν` and `s`.
    pub fn revalidate<O: ColumnOracle + ?Sized>(&mut self, oracle: &O) {
        self.z = crate::operator::setup_matvec(oracle, &self.x);
        self.refresh_scalars();
    }

    /// Gradient scores `c_j = ν·x_j − z_j`, so that `∇f = 4c`.
    pub fn gradient_scores(&self) -> Vec<f64> {
        self.x
            .iter()
            .zip(self.z.iter())
            .map(|(&x, &z)| self.nu * x - z)
            .collect()
    }

    #[inline]
    pub fn score(&self, j: usize) -> f64 {
        self.nu * self.x[j] - self.z[j]
    }

    /// Overwrites the iterate (used by the power method, which moves every
    /// coordinate at once).
    pub(crate) fn replace(&mut self, x: Vec<f64>, z: Vec<f64>) {
        self.x = x;
        self.z = z;
        self.refresh_scalars();
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
