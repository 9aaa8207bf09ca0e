use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{eps_energy, eps_obj_from_gap, eps_tan, ReferenceVector};
use super::reference::ReferenceSolution;
use crate::engine::{Method, SolverState};
use crate::error::{Error, Result};
use crate::operator::ColumnOracle;

/// Metrics at one checkpoint of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    #[serde(rename = "col_access")]
    pub column_accesses: u64,
    #[serde(rename = "f")]
    pub f_value: f64,
    pub eps_obj: f64,
    pub eps_energy: f64,
    pub eps_tan: f64,
}

/// Trip-wires that end a run as diverged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceGuard {
    /// `f` above its running minimum by this factor.
    pub blowup_factor: f64,
    /// Consecutive iterations with increasing `f`.
    pub max_consecutive_increases: u64,
    /// Iterations without a new minimum of `f − f*`; `None` disables.
    pub stall_window: Option<u64>,
}

impl DivergenceGuard {
    /// Defaults scaled to the problem dimension.
    pub fn for_dim(n: usize) -> Self {
        Self {
            blowup_factor: 1e6,
            max_consecutive_increases: 1000,
            stall_window: Some((20 * n as u64).max(10_000)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub method: Method,
    pub x0: Vec<f64>,
    /// Stop once `ε_obj < tol`.
    pub tol: f64,
    /// Stop once this many column accesses have been spent.
    pub max_col_access: u64,
    /// Seeds for the per-run RNG; deterministic methods use the first only.
    pub seeds: Vec<u64>,
    /// Record a trace point whenever this many more columns were accessed;
    /// `None` records only the first and last points.
    pub trace_every: Option<u64>,
    /// Reference vector of the projected energy; defaults to `x0`.
    pub x_ref: Option<ReferenceVector>,
    pub guard: DivergenceGuard,
}

impl ExperimentConfig {
    pub fn new(method: Method, x0: Vec<f64>, tol: f64, max_col_access: u64, seeds: Vec<u64>) -> Self {
        let guard = DivergenceGuard::for_dim(x0.len());
        Self {
            method,
            x0,
            tol,
            max_col_access,
            seeds,
            trace_every: None,
            x_ref: None,
            guard,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Converged,
    BudgetExhausted,
    /// The pick rule found every gradient score zero before reaching `tol`.
    Stationary,
    Diverged(String),
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub outcome: Outcome,
    pub iterations: u64,
    /// Column accesses including the initial `z = A·x0`.
    pub column_accesses: u64,
    pub eps_obj: f64,
    /// `‖x‖²` for coordinate methods, the Rayleigh quotient for the power
    /// method.
    pub lambda_estimate: f64,
    pub x: Vec<f64>,
    pub trace: Vec<TraceRecord>,
}

/// Iteration statistics over the converged seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub method: String,
    pub k: usize,
    pub min_iters: u64,
    /// Lower median.
    pub med_iters: u64,
    pub max_iters: u64,
    /// `k × med_iters`.
    pub total_col_access: u64,
    pub seeds_used: usize,
    pub diverged_count: usize,
    pub unconverged_count: usize,
}

/// `f − f*` and `f` for the method's current iterate. The power method
/// keeps `‖x‖ = 1`, so it is scored at the best rescaling `√ρ·x`, whose
/// objective is `‖A‖²_F − ρ²` with `ρ = xᵀAx/xᵀx`.
fn gap_and_f(method: &Method, state: &SolverState, reference: &ReferenceSolution) -> (f64, f64, f64) {
    let l1 = reference.lambda1;
    match method {
        Method::PowerMethod => {
            let rho = state.s() / state.nu();
            let gap = (l1 - rho) * (l1 + rho);
            (gap, reference.fstar + gap, rho)
        }
        Method::Coordinate(_) => {
            let gap = state.objective_gap(l1);
            (gap, reference.fstar + gap, state.nu())
        }
    }
}

fn record(
    state: &SolverState,
    f_value: f64,
    eps: f64,
    reference: &ReferenceSolution,
    x_ref: &ReferenceVector,
) -> TraceRecord {
    let energy = x_ref
        .projected_energy(state.x(), state.z())
        .map_or(f64::NAN, |e| eps_energy(e, reference.lambda1));
    TraceRecord {
        iteration: state.iteration(),
        column_accesses: state.column_accesses(),
        f_value,
        eps_obj: eps,
        eps_energy: energy,
        eps_tan: eps_tan(state.x(), &reference.v1),
    }
}

/// Runs one seed to convergence, budget exhaustion or divergence.
pub fn run_single<O: ColumnOracle + ?Sized>(
    oracle: &O,
    reference: &ReferenceSolution,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<SeedRun> {
    cfg.method.validate()?;
    if !(reference.fstar > 0.0) {
        return Err(Error::Undefined("ε_obj needs f* > 0"));
    }
    let x_ref = cfg
        .x_ref
        .clone()
        .unwrap_or_else(|| ReferenceVector::Dense(cfg.x0.clone()));
    let mut state = SolverState::new(oracle, &cfg.x0, seed)?;
    let fstar = reference.fstar;

    let (gap, f, _) = gap_and_f(&cfg.method, &state, reference);
    let mut eps = eps_obj_from_gap(gap, fstar);
    let mut trace = vec![record(&state, f, eps, reference, &x_ref)];
    let mut next_checkpoint = cfg.trace_every.map(|every| state.column_accesses() + every);

    let mut best_f = f;
    let mut best_gap = gap;
    let mut last_f = f;
    let mut last_improvement = 0u64;
    let mut increases = 0u64;
    let mut f_now = f;

    let outcome = loop {
        if eps < cfg.tol {
            break Outcome::Converged;
        }
        if state.column_accesses() >= cfg.max_col_access {
            break Outcome::BudgetExhausted;
        }
        match cfg.method.step(&mut state, oracle) {
            Ok(_) => {}
            Err(Error::Stationary) => break Outcome::Stationary,
            Err(Error::ZeroVector) => break Outcome::Diverged("power iterate vanished".into()),
            Err(e) => return Err(e),
        }
        let (gap, f, _) = gap_and_f(&cfg.method, &state, reference);
        f_now = f;
        eps = eps_obj_from_gap(gap, fstar);

        if let Some(next) = next_checkpoint.as_mut() {
            if state.column_accesses() >= *next {
                trace.push(record(&state, f, eps, reference, &x_ref));
                *next = state.column_accesses() + cfg.trace_every.unwrap_or(u64::MAX);
            }
        }

        if !f.is_finite() || !state.nu().is_finite() {
            break Outcome::Diverged("non-finite objective".into());
        }
        if f > cfg.guard.blowup_factor * best_f {
            break Outcome::Diverged(format!(
                "objective {f:e} exceeds running minimum {best_f:e} by more than {:e}",
                cfg.guard.blowup_factor
            ));
        }
        increases = if f > last_f { increases + 1 } else { 0 };
        if increases >= cfg.guard.max_consecutive_increases {
            break Outcome::Diverged(format!("objective increased for {increases} consecutive iterations"));
        }
        last_f = f;
        best_f = best_f.min(f);
        if gap < best_gap {
            best_gap = gap;
            last_improvement = state.iteration();
        } else if let Some(window) = cfg.guard.stall_window {
            if state.iteration() - last_improvement >= window {
                break Outcome::Diverged(format!("no progress for {window} iterations (ε_obj = {eps:e})"));
            }
        }
    };

    let last = trace.last().map(|r| r.iteration);
    if last != Some(state.iteration()) {
        trace.push(record(&state, f_now, eps, reference, &x_ref));
    }
    let outcome = match outcome {
        Outcome::Stationary if eps < cfg.tol => Outcome::Converged,
        o => o,
    };
    let (_, _, lambda_estimate) = gap_and_f(&cfg.method, &state, reference);
    Ok(SeedRun {
        seed,
        outcome,
        iterations: state.iteration(),
        column_accesses: state.column_accesses(),
        eps_obj: eps,
        lambda_estimate,
        x: state.x().to_vec(),
        trace,
    })
}

/// Lower median of a sorted slice.
fn lower_median(sorted: &[u64]) -> u64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Aggregates per-seed runs into table statistics.
pub fn summarize(method: &Method, n: usize, runs: &[SeedRun]) -> Result<RunStats> {
    let mut iters: Vec<u64> = runs
        .iter()
        .filter(|r| r.outcome == Outcome::Converged)
        .map(|r| r.iterations)
        .collect();
    let diverged_count = runs
        .iter()
        .filter(|r| matches!(r.outcome, Outcome::Diverged(_)))
        .count();
    let unconverged_count = runs.len() - iters.len() - diverged_count;
    if iters.is_empty() {
        let iteration = runs.iter().map(|r| r.iterations).max().unwrap_or(0);
        let reason = match runs.iter().find_map(|r| match &r.outcome {
            Outcome::Diverged(why) => Some(why.clone()),
            _ => None,
        }) {
            Some(why) => format!("all {} seeds failed; first divergence: {why}", runs.len()),
            None => format!("none of {} seeds converged within budget", runs.len()),
        };
        return Err(Error::Diverged { iteration, reason });
    }
    iters.sort_unstable();
    let k = method.batch(n);
    let med = lower_median(&iters);
    Ok(RunStats {
        method: method.to_string(),
        k,
        min_iters: iters[0],
        med_iters: med,
        max_iters: *iters.last().unwrap_or(&0),
        total_col_access: k as u64 * med,
        seeds_used: iters.len(),
        diverged_count,
        unconverged_count,
    })
}

/// Runs every seed in parallel, each with its own RNG. Deterministic
/// methods run the first seed only.
pub fn run_seeds<O: ColumnOracle + ?Sized>(
    oracle: &O,
    reference: &ReferenceSolution,
    cfg: &ExperimentConfig,
) -> Result<Vec<SeedRun>> {
    if cfg.seeds.is_empty() {
        return Err(Error::InvalidConfig("at least one seed is required".into()));
    }
    let seeds: &[u64] = if cfg.method.is_deterministic() {
        &cfg.seeds[..1]
    } else {
        &cfg.seeds
    };
    seeds
        .par_iter()
        .map(|&seed| run_single(oracle, reference, cfg, seed))
        .collect()
}

/// [`run_seeds`] followed by [`summarize`].
pub fn run_experiment<O: ColumnOracle + ?Sized>(
    oracle: &O,
    reference: &ReferenceSolution,
    cfg: &ExperimentConfig,
) -> Result<(RunStats, Vec<SeedRun>)> {
    let runs = run_seeds(oracle, reference, cfg)?;
    let stats = summarize(&cfg.method, oracle.dim(), &runs)?;
    Ok((stats, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Pick, StrategyConfig, Update};
    use crate::harness::reference::reference_eigenpair;
    use crate::operator::{build_synthetic, DenseSymmetric, Metered, SpectrumSpec};

    fn e1(n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        x[0] = 1.0;
        x
    }

    #[test]
    fn lower_median_even() {
        assert_eq!(lower_median(&[1, 2, 3, 4]), 2);
        assert_eq!(lower_median(&[5]), 5);
    }

    #[test]
    fn greedy_runs_are_single_and_deterministic() {
        let a = build_synthetic(&SpectrumSpec::equispaced(60, 108.0, 1)).unwrap();
        let r = reference_eigenpair(&a).unwrap();
        for pick in [Pick::GreedyLS, Pick::GaussSouthwell] {
            let m = Method::Coordinate(StrategyConfig::new(pick, Update::CoordLS));
            let cfg = ExperimentConfig::new(m, e1(60), 1e-6, 1_000_000, vec![0, 1, 2]);
            let (stats, runs) = run_experiment(&a, &r, &cfg).unwrap();
            assert_eq!(runs.len(), 1);
            assert_eq!(stats.min_iters, stats.med_iters);
            assert_eq!(stats.med_iters, stats.max_iters);
            let (again, _) = run_experiment(&a, &r, &cfg).unwrap();
            assert_eq!(stats, again);
            assert!((runs[0].lambda_estimate - 108.0).abs() < 1e-3);
        }
    }

    #[test]
    fn stochastic_seeds_reproduce_traces() {
        let a = build_synthetic(&SpectrumSpec::equispaced(40, 108.0, 2)).unwrap();
        let r = reference_eigenpair(&a).unwrap();
        let m = Method::Coordinate(StrategyConfig::new(Pick::GradPower(1.0), Update::CoordLS));
        let mut cfg = ExperimentConfig::new(m, e1(40), 1e-6, 1_000_000, vec![3, 4]);
        cfg.trace_every = Some(50);
        let (_, first) = run_experiment(&a, &r, &cfg).unwrap();
        let (_, second) = run_experiment(&a, &r, &cfg).unwrap();
        for (x, y) in first.iter().zip(second.iter()) {
            assert_eq!(x.trace, y.trace);
        }
        assert_ne!(first[0].trace, first[1].trace);
        for run in &first {
            assert!(run
                .trace
                .windows(2)
                .all(|w| w[0].column_accesses <= w[1].column_accesses));
        }
    }

    #[test]
    fn budget_overshoot_at_most_one_batch() {
        let a = Metered::new(build_synthetic(&SpectrumSpec::equispaced(50, 108.0, 4)).unwrap());
        let r = reference_eigenpair(&a).unwrap();
        let m = Method::Coordinate(StrategyConfig::new(Pick::GradPower(1.0), Update::CoordLS).with_k(3));
        let cfg = ExperimentConfig::new(m, e1(50), 1e-14, 1000, vec![0]);
        let run = run_single(&a, &r, &cfg, 0).unwrap();
        assert_eq!(run.outcome, Outcome::BudgetExhausted);
        assert!(run.column_accesses <= 1000 + 3);
        assert_eq!(a.accesses(), run.column_accesses);
    }

    #[test]
    fn power_method_on_diagonal() {
        let a = DenseSymmetric::from_diagonal(&[2.0, 1.0, 0.5]).unwrap();
        let r = reference_eigenpair(&a).unwrap();
        let cfg = ExperimentConfig::new(Method::PowerMethod, vec![1.0, 1.0, 1.0], 1e-8, 10_000, vec![0]);
        let run = run_single(&a, &r, &cfg, 0).unwrap();
        assert_eq!(run.outcome, Outcome::Converged);
        assert_eq!(run.column_accesses, 3 + 3 * run.iterations);
        assert!((run.lambda_estimate - 2.0).abs() < 1e-10);
    }

    #[test]
    fn summarize_reports_failures() {
        let m = Method::PowerMethod;
        let mk = |outcome, iterations| SeedRun {
            seed: 0,
            outcome,
            iterations,
            column_accesses: 0,
            eps_obj: 0.0,
            lambda_estimate: 0.0,
            x: vec![],
            trace: vec![],
        };
        let runs = vec![mk(Outcome::Diverged("x".into()), 5), mk(Outcome::BudgetExhausted, 9)];
        assert!(matches!(summarize(&m, 4, &runs), Err(Error::Diverged { .. })));
        let runs = vec![
            mk(Outcome::Converged, 7),
            mk(Outcome::Converged, 3),
            mk(Outcome::Diverged("x".into()), 1),
            mk(Outcome::Converged, 5),
            mk(Outcome::Converged, 9),
        ];
        let s = summarize(&m, 4, &runs).unwrap();
        assert_eq!((s.min_iters, s.med_iters, s.max_iters), (3, 5, 9));
        assert_eq!(s.total_col_access, 20);
        assert_eq!((s.seeds_used, s.diverged_count, s.unconverged_count), (4, 1, 0));
    }
}
