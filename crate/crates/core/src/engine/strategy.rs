use std::fmt;

use rand::Rng;

use super::cubic::{delta_f, solve_cubic_min, CubicCoeffs};
use super::state::{dot, SolverState};
use crate::error::{Error, Result};
use crate::operator::{column_norm_max, ColumnBuf, ColumnOracle, ColumnView};

/// How the coordinates of one iteration are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pick {
    /// `j = ℓ mod n` (consecutive indices for `k > 1`).
    Cyclic,
    Uniform,
    /// Sample with probability `∝ |∇_j f|^t`.
    GradPower(f64),
    /// Largest `|∇_j f|` (Gauss–Southwell).
    GaussSouthwell,
    /// Largest decrease under exact coordinate line search.
    GreedyLS,
    /// Every coordinate (`Ω = {1..n}`).
    Full,
}

/// How the picked coordinates move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Update {
    /// `δ_j = −γ·∇_j f`.
    FixedGrad(f64),
    /// Exact line search along each picked coordinate independently.
    CoordLS,
    /// Exact line search along the gradient restricted to the picked set.
    VecLS,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub pick: Pick,
    pub update: Update,
    pub k: usize,
    pub with_replacement: bool,
    /// Divide each batch delta by `k`.
    pub averaged: bool,
    /// Permit greedy picks with `k > 1` and independent (non-averaged)
    /// updates. This is the naive batch extension, which is not expected
    /// to converge.
    pub allow_naive_batch: bool,
}

impl StrategyConfig {
    pub fn new(pick: Pick, update: Update) -> Self {
        Self {
            pick,
            update,
            k: 1,
            with_replacement: true,
            averaged: false,
            allow_naive_batch: false,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn averaged(mut self, averaged: bool) -> Self {
        self.averaged = averaged;
        self
    }

    pub fn with_replacement(mut self, with_replacement: bool) -> Self {
        self.with_replacement = with_replacement;
        self
    }

    pub fn allow_naive_batch(mut self, allow: bool) -> Self {
        self.allow_naive_batch = allow;
        self
    }

    /// Coordinates touched per iteration on an `n`-dimensional problem.
    pub fn batch(&self, n: usize) -> usize {
        match self.pick {
            Pick::Full => n,
            _ => self.k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.k == 0 {
            return bad("batch size k must be at least 1");
        }
        if let Pick::GradPower(t) = self.pick {
            if !(t >= 0.0) || !t.is_finite() {
                return bad("sampling power t must be finite and non-negative");
            }
        }
        if let Update::FixedGrad(g) = self.update {
            if !(g > 0.0) || !g.is_finite() {
                return bad("stepsize must be positive");
            }
        }
        if self.pick == Pick::GreedyLS && self.update != Update::CoordLS {
            return bad("greedy line-search pick requires coordinate line-search update");
        }
        if self.update == Update::VecLS && !matches!(self.pick, Pick::Uniform | Pick::GradPower(_) | Pick::Full) {
            return bad("vector line search requires uniform, gradient-power or full pick");
        }
        if matches!(self.pick, Pick::GaussSouthwell | Pick::GreedyLS)
            && self.k > 1
            && !self.averaged
            && !self.allow_naive_batch
        {
            return bad("greedy picks with k > 1 require averaged batching");
        }
        Ok(())
    }
}

impl fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.pick {
            Pick::Cyclic => "CD",
            Pick::GaussSouthwell | Pick::GreedyLS => "GCD",
            Pick::Uniform | Pick::GradPower(_) => "SCD",
            Pick::Full => "",
        };
        let pick = match self.pick {
            Pick::Cyclic => "Cyc".to_string(),
            Pick::Uniform => "Uni".to_string(),
            Pick::GradPower(_) | Pick::GaussSouthwell | Pick::Full => "Grad".to_string(),
            Pick::GreedyLS => "LS".to_string(),
        };
        let update = match self.update {
            Update::FixedGrad(_) => "Grad",
            Update::CoordLS => "LS",
            Update::VecLS => "vecLS",
        };
        if kind.is_empty() {
            write!(f, "{pick}-{update}")?;
        } else {
            write!(f, "{kind}-{pick}-{update}")?;
        }
        if let Pick::GradPower(t) = self.pick {
            write!(f, "({t})")?;
        }
        Ok(())
    }
}

/// Solver driven by the harness: a coordinate strategy or the power method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Coordinate(StrategyConfig),
    PowerMethod,
}

impl Method {
    pub fn validate(&self) -> Result<()> {
        match self {
            Method::Coordinate(cfg) => cfg.validate(),
            Method::PowerMethod => Ok(()),
        }
    }

    /// Column accesses charged per iteration.
    pub fn batch(&self, n: usize) -> usize {
        match self {
            Method::Coordinate(cfg) => cfg.batch(n),
            Method::PowerMethod => n,
        }
    }

    /// One exact line search per iteration (`CoordLS` on a single
    /// coordinate, or `VecLS`): `f` cannot increase.
    pub fn is_monotone(&self) -> bool {
        match self {
            Method::Coordinate(cfg) => match cfg.update {
                Update::FixedGrad(_) => false,
                Update::CoordLS => cfg.k == 1,
                Update::VecLS => true,
            },
            Method::PowerMethod => false,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            Method::Coordinate(cfg) => !matches!(cfg.pick, Pick::Uniform | Pick::GradPower(_)),
            Method::PowerMethod => true,
        }
    }

    pub fn step<O: ColumnOracle + ?Sized>(&self, state: &mut SolverState, oracle: &O) -> Result<StepReport> {
        match self {
            Method::Coordinate(cfg) => step(state, oracle, cfg),
            Method::PowerMethod => power_method_step(state, oracle),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Coordinate(cfg) => cfg.fmt(f),
            Method::PowerMethod => f.write_str("PM"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub indices: Vec<usize>,
    pub deltas: Vec<f64>,
    pub column_accesses: u64,
}

pub fn pick_cyclic(state: &SolverState) -> usize {
    (state.iteration % state.dim() as u64) as usize
}

/// Samples `k` indices with `P(j) ∝ |c_j|^t` by inverse CDF over sorted
/// uniform variates. `t = 0` is uniform over all coordinates.
pub fn pick_grad_power(state: &mut SolverState, t: f64, k: usize, with_replacement: bool) -> Result<Vec<usize>> {
    let n = state.dim();
    let mut weights = std::mem::take(&mut state.scratch);
    weights.clear();
    if t == 0.0 {
        weights.resize(n, 1.0);
    } else {
        let cmax = (0..n).fold(0.0f64, |m, j| m.max(state.score(j).abs()));
        if cmax == 0.0 || !cmax.is_finite() {
            state.scratch = weights;
            return Err(Error::Stationary);
        }
        weights.extend((0..n).map(|j| (state.score(j).abs() / cmax).powf(t)));
    }
    let picked = if with_replacement {
        sample_with_replacement(&weights, k, &mut state.rng)
    } else {
        sample_without_replacement(&mut weights, k, &mut state.rng)
    };
    state.scratch = weights;
    Ok(picked)
}

fn sample_with_replacement(weights: &[f64], k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let mut targets: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * total).collect();
    targets.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(k);
    let mut cum = 0.0;
    let mut last_positive = 0;
    let mut next = targets.iter().peekable();
    for (j, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last_positive = j;
        cum += w;
        while let Some(&&u) = next.peek() {
            if u < cum {
                out.push(j);
                next.next();
            } else {
                break;
            }
        }
        if out.len() == k {
            break;
        }
    }
    // Rounding in the running sum can leave the top variates unassigned.
    out.resize(k, last_positive);
    out
}

fn sample_without_replacement(weights: &mut [f64], k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut total: f64 = weights.iter().sum();
    for _ in 0..k {
        if !(total > 0.0) {
            break;
        }
        let u = rng.random::<f64>() * total;
        let mut cum = 0.0;
        let mut chosen = None;
        for (j, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            cum += w;
            chosen = Some(j);
            if u < cum {
                break;
            }
        }
        let Some(j) = chosen else { break };
        out.push(j);
        weights[j] = 0.0;
        total = weights.iter().sum();
    }
    out
}

/// `argmax_j |c_j|`, lowest index on ties.
pub fn pick_gauss_southwell(state: &SolverState) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for j in 0..state.dim() {
        let v = state.score(j).abs();
        if v > best.1 {
            best = (j, v);
        }
    }
    best.0
}

fn top_k_by(n: usize, k: usize, key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Coefficients of `h'(α)/4` for `h(α) = f(x + α·e_j)`:
/// `b = 3x_j`, `c = ν + 2x_j² − A_jj`, `d = ν·x_j − z_j`.
pub fn coord_cubic(state: &SolverState, j: usize, a_jj: f64) -> CubicCoeffs {
    let xj = state.x[j];
    CubicCoeffs::new(3.0 * xj, state.nu + 2.0 * xj * xj - a_jj, state.nu * xj - state.z[j])
}

/// Exact coordinate line search in the depressed variable `β = x_j + α`:
/// `β³ + pβ + q = 0` with `p = ν − x_j² − A_jj`, `q = A_jj·x_j − z_j`.
/// Returns the increment `β* − x_j`.
pub fn coord_ls_delta(state: &SolverState, j: usize, a_jj: f64) -> f64 {
    let xj = state.x[j];
    let p = state.nu - xj * xj - a_jj;
    let q = a_jj * xj - state.z[j];
    solve_cubic_min(&CubicCoeffs::depressed(p, q)) - xj
}

/// Exact line search on every coordinate; returns the `(j, α)` with the
/// most negative `Δf_j` (lowest `j` on ties). Reads only diagonals.
pub fn pick_greedy_ls<O: ColumnOracle + ?Sized>(state: &SolverState, oracle: &O) -> (usize, f64) {
    let mut best = (0, 0.0, f64::INFINITY);
    for j in 0..state.dim() {
        let coeffs = coord_cubic(state, j, oracle.diag(j));
        let alpha = solve_cubic_min(&coeffs);
        let df = delta_f(alpha, &coeffs);
        if df < best.2 {
            best = (j, alpha, df);
        }
    }
    (best.0, best.1)
}

fn greedy_ls_top_k<O: ColumnOracle + ?Sized>(state: &SolverState, oracle: &O, k: usize) -> Vec<(usize, f64)> {
    let n = state.dim();
    let scored: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let coeffs = coord_cubic(state, j, oracle.diag(j));
            let alpha = solve_cubic_min(&coeffs);
            (alpha, delta_f(alpha, &coeffs))
        })
        .collect();
    top_k_by(n, k, |j| scored[j].1)
        .into_iter()
        .map(|j| (j, scored[j].0))
        .collect()
}

/// Line search along `v = ∇f` restricted to `Ω` (duplicates ignored).
///
/// `columns[i]` must hold `A[:, Ω_i]`. Returns `α*` such that the update is
/// `x_Ω += α*·v_Ω`; zero when `v_Ω = 0`.
pub fn vec_ls_alpha(state: &SolverState, omega: &[usize], columns: &[ColumnView<'_>]) -> f64 {
    let v: Vec<f64> = omega.iter().map(|&j| 4.0 * state.score(j)).collect();
    let vv = dot(&v, &v);
    if vv == 0.0 {
        return 0.0;
    }
    let norm = vv.sqrt();
    // Work along the unit direction u = v/‖v‖ for conditioning.
    let mut u_full = vec![0.0; state.dim()];
    for (&j, &vj) in omega.iter().zip(v.iter()) {
        u_full[j] = vj / norm;
    }
    let ux: f64 = omega.iter().map(|&j| u_full[j] * state.x[j]).sum();
    let uz: f64 = omega.iter().map(|&j| u_full[j] * state.z[j]).sum();
    let uau: f64 = omega
        .iter()
        .zip(columns.iter())
        .map(|(&j, col)| u_full[j] * col.dot(&u_full))
        .sum();
    let coeffs = CubicCoeffs::new(3.0 * ux, state.nu + 2.0 * ux * ux - uau, state.nu * ux - uz);
    solve_cubic_min(&coeffs) / norm
}

fn dedup_sorted(mut idx: Vec<usize>) -> Vec<usize> {
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// One iteration of the coordinate-wise descent engine.
pub fn step<O: ColumnOracle + ?Sized>(state: &mut SolverState, oracle: &O, cfg: &StrategyConfig) -> Result<StepReport> {
    let n = state.dim();
    let k = cfg.k;
    let before = state.column_accesses;

    let mut greedy_alphas = None;
    let omega: Vec<usize> = match cfg.pick {
        Pick::Cyclic => (0..k)
            .map(|i| ((state.iteration * k as u64 + i as u64) % n as u64) as usize)
            .collect(),
        Pick::Uniform => pick_grad_power(state, 0.0, k, cfg.with_replacement)?,
        Pick::GradPower(t) => pick_grad_power(state, t, k, cfg.with_replacement)?,
        Pick::GaussSouthwell if k == 1 => vec![pick_gauss_southwell(state)],
        Pick::GaussSouthwell => top_k_by(n, k, |j| -state.score(j).abs()),
        Pick::GreedyLS => {
            let picks = if k == 1 {
                vec![pick_greedy_ls(state, oracle)]
            } else {
                greedy_ls_top_k(state, oracle, k)
            };
            let (idx, alphas): (Vec<usize>, Vec<f64>) = picks.into_iter().unzip();
            greedy_alphas = Some(alphas);
            idx
        }
        Pick::Full => (0..n).collect(),
    };
    if omega.is_empty() {
        return Err(Error::Stationary);
    }
    let scale = if cfg.averaged { 1.0 / k as f64 } else { 1.0 };

    let (indices, deltas) = match cfg.update {
        Update::FixedGrad(gamma) => {
            let deltas: Vec<f64> = omega.iter().map(|&j| -gamma * 4.0 * state.score(j) * scale).collect();
            for (&j, &d) in omega.iter().zip(deltas.iter()) {
                state.apply_coordinate_delta(oracle, j, d);
            }
            (omega, deltas)
        }
        Update::CoordLS => {
            let deltas: Vec<f64> = match greedy_alphas {
                Some(alphas) => alphas.into_iter().map(|a| a * scale).collect(),
                None => omega
                    .iter()
                    .map(|&j| coord_ls_delta(state, j, oracle.diag(j)) * scale)
                    .collect(),
            };
            for (&j, &d) in omega.iter().zip(deltas.iter()) {
                state.apply_coordinate_delta(oracle, j, d);
            }
            (omega, deltas)
        }
        Update::VecLS => {
            let omega = dedup_sorted(omega);
            let mut bufs: Vec<ColumnBuf> = (0..omega.len()).map(|_| ColumnBuf::new()).collect();
            let columns: Vec<ColumnView<'_>> = omega
                .iter()
                .zip(bufs.iter_mut())
                .map(|(&j, buf)| oracle.column(j, buf))
                .collect();
            let alpha = vec_ls_alpha(state, &omega, &columns);
            let deltas: Vec<f64> = omega.iter().map(|&j| alpha * 4.0 * state.score(j) * scale).collect();
            for ((&j, &d), col) in omega.iter().zip(deltas.iter()).zip(columns) {
                state.apply_with_column(j, d, oracle.diag(j), col);
            }
            (omega, deltas)
        }
    };
    state.iteration += 1;
    Ok(StepReport {
        indices,
        deltas,
        column_accesses: state.column_accesses - before,
    })
}

/// `x ← A·x/‖A·x‖`; the new `z = A·x` costs `n` column reads.
pub fn power_method_step<O: ColumnOracle + ?Sized>(state: &mut SolverState, oracle: &O) -> Result<StepReport> {
    let n = state.dim();
    let norm = dot(&state.z, &state.z).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let x: Vec<f64> = state.z.iter().map(|v| v / norm).collect();
    let mut z = vec![0.0; n];
    let mut buf = std::mem::take(&mut state.buf);
    for (j, &xj) in x.iter().enumerate() {
        oracle.column(j, &mut buf).axpy(xj, &mut z);
    }
    state.buf = buf;
    state.replace(x, z);
    state.column_accesses += n as u64;
    state.iteration += 1;
    Ok(StepReport {
        indices: Vec::new(),
        deltas: Vec::new(),
        column_accesses: n as u64,
    })
}

/// `γ_max = 1/(4(n+4)R²)` with `R = √(max_j ‖A[:, j]‖)`.
pub fn stepsize_bound<O: ColumnOracle + ?Sized>(oracle: &O) -> f64 {
    let r_sq = column_norm_max(oracle);
    1.0 / (4.0 * (oracle.dim() as f64 + 4.0) * r_sq)
}
