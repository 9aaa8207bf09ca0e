//! Matrix-free symmetric operators.
//!
//! Solvers only ever see a [`ColumnOracle`]: the dimension, one diagonal
//! entry, or one full column at a time. Column reads through
//! [`ColumnOracle::column`] are the unit of cost and can be metered with
//! [`Metered`]; setup passes (norms, reference eigenpairs) go through
//! [`ColumnOracle::scan_column`] and are never counted.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Scratch storage that oracles generating columns on the fly write into.
#[derive(Debug, Default, Clone)]
pub struct ColumnBuf {
    rows: Vec<usize>,
    values: Vec<f64>,
    nested: Option<Box<ColumnBuf>>,
}

impl ColumnBuf {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fills the buffer from `(row, value)` pairs and returns a sparse view.
    pub fn fill_sparse<I>(&mut self, entries: I) -> ColumnView<'_>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        self.rows.clear();
        self.values.clear();
        for (i, v) in entries {
            self.rows.push(i);
            self.values.push(v);
        }
        ColumnView::Sparse {
            rows: &self.rows,
            values: &self.values,
        }
    }
}

/// One column `A[:, j]`, either borrowed from dense storage or sparse.
#[derive(Debug, Clone, Copy)]
pub enum ColumnView<'a> {
    Dense(&'a [f64]),
    Sparse { rows: &'a [usize], values: &'a [f64] },
}

impl ColumnView<'_> {
    /// Number of stored entries.
    pub fn stored(&self) -> usize {
        match self {
            ColumnView::Dense(v) => v.len(),
            ColumnView::Sparse { rows, .. } => rows.len(),
        }
    }

    /// Number of entries that are not exactly zero.
    pub fn nnz(&self) -> usize {
        match self {
            ColumnView::Dense(v) => v.iter().filter(|x| **x != 0.0).count(),
            ColumnView::Sparse { values, .. } => values.iter().filter(|x| **x != 0.0).count(),
        }
    }

    pub fn for_each(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            ColumnView::Dense(v) => v.iter().enumerate().for_each(|(i, &a)| f(i, a)),
            ColumnView::Sparse { rows, values } => rows.iter().zip(values.iter()).for_each(|(&i, &a)| f(i, a)),
        }
    }

    /// Entry at row `i`; zero when not stored.
    pub fn get(&self, i: usize) -> f64 {
        match self {
            ColumnView::Dense(v) => v[i],
            ColumnView::Sparse { rows, values } => rows.iter().position(|&r| r == i).map_or(0.0, |p| values[p]),
        }
    }

    /// `y += alpha * column`.
    pub fn axpy(&self, alpha: f64, y: &mut [f64]) {
        match self {
            ColumnView::Dense(v) => y.iter_mut().zip(v.iter()).for_each(|(yi, &a)| *yi += alpha * a),
            ColumnView::Sparse { rows, values } => {
                for (&i, &a) in rows.iter().zip(values.iter()) {
                    y[i] += alpha * a;
                }
            }
        }
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        match self {
            ColumnView::Dense(v) => v.iter().zip(x.iter()).map(|(a, b)| a * b).sum(),
            ColumnView::Sparse { rows, values } => rows.iter().zip(values.iter()).map(|(&i, &a)| a * x[i]).sum(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match self {
            ColumnView::Dense(v) => v.iter().map(|a| a * a).sum(),
            ColumnView::Sparse { values, .. } => values.iter().map(|a| a * a).sum(),
        }
    }

    pub fn to_pairs(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(self.stored());
        self.for_each(|i, a| out.push((i, a)));
        out
    }
}

/// A real symmetric matrix available one column at a time.
pub trait ColumnOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// `A[j, j]`. Never counted as a column access.
    fn diag(&self, j: usize) -> f64;

    /// Column `A[:, j]`; the solver-facing read that [`Metered`] counts.
    fn column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a>;

    /// Same values as [`column`](Self::column), for setup passes that must
    /// not show up in the access count.
    fn scan_column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        self.column(j, buf)
    }

    /// Metered column reads so far, when the oracle keeps a count.
    fn accesses(&self) -> u64 {
        0
    }
}

macro_rules! forward_oracle {
    ($($ty:ty),*) => {$(
        impl<O: ColumnOracle + ?Sized> ColumnOracle for $ty {
            fn dim(&self) -> usize {
                (**self).dim()
            }
            fn diag(&self, j: usize) -> f64 {
                (**self).diag(j)
            }
            fn column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
                (**self).column(j, buf)
            }
            fn scan_column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
                (**self).scan_column(j, buf)
            }
            fn accesses(&self) -> u64 {
                (**self).accesses()
            }
        }
    )*};
}

forward_oracle!(&O, Box<O>, Arc<O>);

/// Wraps an oracle and counts every solver-facing column read.
#[derive(Debug)]
pub struct Metered<O> {
    inner: O,
    count: AtomicU64,
}

impl<O: ColumnOracle> Metered<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn reset(&self) {
        self.count.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: ColumnOracle> ColumnOracle for Metered<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn diag(&self, j: usize) -> f64 {
        self.inner.diag(j)
    }

    fn column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.column(j, buf)
    }

    fn scan_column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        self.inner.scan_column(j, buf)
    }

    fn accesses(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// Dense symmetric matrix with all `n²` entries stored row-major.
///
/// Rows equal columns, so column reads borrow a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetric {
    n: usize,
    entries: Vec<f64>,
}

impl DenseSymmetric {
    /// Builds from row-major entries, mirroring `(A + Aᵀ) / 2`.
    pub fn from_row_major(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpectrum("dimension must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        let mut m = Self { n, entries };
        m.symmetrize();
        Ok(m)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self::from_row_major(n, entries)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.entries)
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self.entries[i * n + j] + self.entries[j * n + i]);
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg;
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// Reads a whitespace-separated text file: `n`, then `n` rows of `n` values.
    pub fn read_text(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_text(&text)
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut tokens = text
            .lines()
            .enumerate()
            .flat_map(|(line, l)| l.split_whitespace().map(move |t| (line + 1, t)));
        let (line, first) = tokens.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty matrix file".into(),
        })?;
        let n: usize = first.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected dimension, found {first:?}"),
        })?;
        let mut entries = Vec::with_capacity(n * n);
        for (line, tok) in tokens.by_ref().take(n * n) {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid number {tok:?}"),
            })?;
            entries.push(v);
        }
        if entries.len() != n * n {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} entries, found {}", n * n, entries.len()),
            });
        }
        if let Some((line, tok)) = tokens.next() {
            return Err(Error::Parse {
                line,
                msg: format!("trailing token {tok:?}"),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::Parse {
                        line: i + 2,
                        msg: format!("matrix not symmetric at ({i}, {j}): {a} vs {b}"),
                    });
                }
            }
        }
        Self::from_row_major(n, entries)
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
        writeln!(out, "{}", self.n).map_err(io)?;
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", row.join(" ")).map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

impl ColumnOracle for DenseSymmetric {
    fn dim(&self) -> usize {
        self.n
    }

    fn diag(&self, j: usize) -> f64 {
        self.entries[j * self.n + j]
    }

    fn column<'a>(&'a self, j: usize, _buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        ColumnView::Dense(self.row(j))
    }
}

/// Eigenvalues (descending) plus the seed of the random orthogonal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
}

impl SpectrumSpec {
    /// `λ₁` followed by `n − 1` values on the grid `1 + 99·m/(n−1)`,
    /// `m = n−2, …, 0`, i.e. equally spaced on `[1, 100)`.
    pub fn equispaced(n: usize, lambda1: f64, seed: u64) -> Self {
        let mut eigenvalues = Vec::with_capacity(n);
        if n > 0 {
            eigenvalues.push(lambda1);
        }
        for i in 2..=n {
            eigenvalues.push(1.0 + 99.0 * (n - i) as f64 / (n - 1) as f64);
        }
        Self { eigenvalues, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let ev = &self.eigenvalues;
        if ev.is_empty() {
            return Err(Error::InvalidSpectrum("dimension must be positive".into()));
        }
        if ev.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpectrum("eigenvalues must be finite".into()));
        }
        if ev[0] <= 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "largest eigenvalue must be positive, got {}",
                ev[0]
            )));
        }
        if ev.len() > 1 && ev[0] <= ev[1] {
            return Err(Error::InvalidSpectrum(format!(
                "need λ₁ > λ₂, got {} and {}",
                ev[0], ev[1]
            )));
        }
        if ev.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidSpectrum("eigenvalues must be non-increasing".into()));
        }
        Ok(())
    }
}

/// `Q·diag(λ)·Qᵀ` with `Q` the orthogonal QR factor of a seeded Gaussian matrix.
pub fn build_synthetic(spec: &SpectrumSpec) -> Result<DenseSymmetric> {
    spec.validate()?;
    let n = spec.eigenvalues.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gauss = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let q = gauss.qr().q();
    let mut scaled = q.clone();
    for (j, &lambda) in spec.eigenvalues.iter().enumerate() {
        scaled.column_mut(j).scale_mut(lambda);
    }
    let a = scaled * q.transpose();
    DenseSymmetric::from_nalgebra(&a)
}

/// Lazy `scale·M + shift·I`.
#[derive(Debug, Clone)]
pub struct ShiftScale<O> {
    inner: O,
    scale: f64,
    shift: f64,
}

impl<O: ColumnOracle> ShiftScale<O> {
    pub fn new(inner: O, scale: f64, shift: f64) -> Self {
        Self { inner, scale, shift }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    fn transform<'a>(
        &self,
        j: usize,
        buf: &'a mut ColumnBuf,
        read: impl for<'b> FnOnce(&'b O, &'b mut ColumnBuf) -> ColumnView<'b>,
    ) -> ColumnView<'a> {
        let ColumnBuf { rows, values, nested } = buf;
        let inner_buf = nested.get_or_insert_with(Default::default);
        let view = read(&self.inner, inner_buf);
        rows.clear();
        values.clear();
        match view {
            ColumnView::Dense(v) => {
                values.extend(v.iter().map(|a| self.scale * a));
                values[j] += self.shift;
                ColumnView::Dense(values)
            }
            ColumnView::Sparse { rows: r, values: v } => {
                let mut has_diag = false;
                for (&i, &a) in r.iter().zip(v.iter()) {
                    let mut val = self.scale * a;
                    if i == j {
                        val += self.shift;
                        has_diag = true;
                    }
                    rows.push(i);
                    values.push(val);
                }
                if !has_diag && self.shift != 0.0 {
                    rows.push(j);
                    values.push(self.shift);
                }
                ColumnView::Sparse { rows, values }
            }
        }
    }
}

impl<O: ColumnOracle> ColumnOracle for ShiftScale<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn diag(&self, j: usize) -> f64 {
        self.scale * self.inner.diag(j) + self.shift
    }

    fn column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        self.transform(j, buf, |o, b| o.column(j, b))
    }

    fn scan_column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        self.transform(j, buf, |o, b| o.scan_column(j, b))
    }

    fn accesses(&self) -> u64 {
        self.inner.accesses()
    }
}

/// All columns of an oracle materialized in compressed sparse form.
///
/// Reading a column is a slice borrow; the values are those the source
/// oracle produced at construction.
#[derive(Debug, Clone)]
pub struct SparseColumns {
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    values: Vec<f64>,
    diag: Vec<f64>,
}

impl SparseColumns {
    /// Materializes every column via setup reads (not metered).
    pub fn from_oracle<O: ColumnOracle + ?Sized>(oracle: &O) -> Self {
        let n = oracle.dim();
        let cols: Vec<Vec<(usize, f64)>> = (0..n)
            .into_par_iter()
            .map_init(ColumnBuf::new, |buf, j| {
                let mut pairs = oracle.scan_column(j, buf).to_pairs();
                pairs.retain(|&(_, v)| v != 0.0);
                pairs
            })
            .collect();
        let mut col_ptr = Vec::with_capacity(n + 1);
        col_ptr.push(0);
        let total: usize = cols.iter().map(Vec::len).sum();
        let mut rows = Vec::with_capacity(total);
        let mut values = Vec::with_capacity(total);
        for c in &cols {
            for &(i, v) in c {
                rows.push(i);
                values.push(v);
            }
            col_ptr.push(rows.len());
        }
        let diag = (0..n).map(|j| oracle.diag(j)).collect();
        Self {
            col_ptr,
            rows,
            values,
            diag,
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.len()
    }
}

impl ColumnOracle for SparseColumns {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn diag(&self, j: usize) -> f64 {
        self.diag[j]
    }

    fn column<'a>(&'a self, j: usize, _buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        ColumnView::Sparse {
            rows: &self.rows[range.clone()],
            values: &self.values[range],
        }
    }
}

/// `max_j ‖A[:, j]‖₂` in one unmetered pass.
pub fn column_norm_max<O: ColumnOracle + ?Sized>(oracle: &O) -> f64 {
    (0..oracle.dim())
        .into_par_iter()
        .map_init(ColumnBuf::new, |buf, j| oracle.scan_column(j, buf).norm_sq())
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// `‖A‖²_F` in one unmetered pass.
pub fn frobenius_norm_sq<O: ColumnOracle + ?Sized>(oracle: &O) -> f64 {
    // Per-column sums are collected first so the total does not depend on
    // how rayon splits the work.
    let per_col: Vec<f64> = (0..oracle.dim())
        .into_par_iter()
        .map_init(ColumnBuf::new, |buf, j| oracle.scan_column(j, buf).norm_sq())
        .collect();
    per_col.iter().sum()
}

/// `y = A·x` through unmetered reads, row by row (`y_i = A[:, i]ᵀx`).
pub fn setup_matvec<O: ColumnOracle + ?Sized>(oracle: &O, x: &[f64]) -> Vec<f64> {
    (0..oracle.dim())
        .into_par_iter()
        .map_init(ColumnBuf::new, |buf, i| oracle.scan_column(i, buf).dot(x))
        .collect()
}

/// Dense copy of the operator via unmetered reads.
pub fn to_dense<O: ColumnOracle + ?Sized>(oracle: &O) -> DMatrix<f64> {
    let n = oracle.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut buf = ColumnBuf::new();
    for j in 0..n {
        oracle.scan_column(j, &mut buf).for_each(|i, v| m[(i, j)] = v);
    }
    m
}
