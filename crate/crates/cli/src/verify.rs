//! Fast invariant suites behind `levp verify`.

use levp_core::engine::{
    coord_cubic, coord_ls_delta, delta_f, step, Method, Pick, SolverState, StrategyConfig, Update,
};
use levp_core::harness::{reference_eigenpair, run_seeds, ExperimentConfig};
use levp_core::landscape::{gradient, hessian_apply, objective, stationary_point};
use levp_core::operator::{
    build_synthetic, frobenius_norm_sq, setup_matvec, ColumnBuf, ColumnOracle, ShiftScale, SpectrumSpec,
};
use levp_hubbard::{HubbardHamiltonian, LatticeSpec, DEFAULT_DIM_CAP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub result: Result<String, String>,
}

fn fail<T>(msg: String) -> Result<T, String> {
    Err(msg)
}

fn random_spectrum(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut ev: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..10.0)).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    // Keep a clear positive top eigenvalue.
    ev[0] = ev[1].max(0.0) + 1.0;
    ev
}

fn landscape(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stationary = 0;
    for m in 0..5 {
        let n = 12;
        let ev = random_spectrum(&mut rng, n);
        let a = build_synthetic(&SpectrumSpec {
            eigenvalues: ev.clone(),
            seed: seed + m,
        })
        .map_err(|e| e.to_string())?;
        let eig = a.to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let v1: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
        let l1 = eig.eigenvalues[order[0]];
        for &i in &order {
            let li = eig.eigenvalues[i];
            if li <= 0.0 {
                continue;
            }
            let vi: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let x = stationary_point(li, &vi).map_err(|e| e.to_string())?;
            let z = setup_matvec(&a, &x);
            let g = gradient(&x, &z, li);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-8 * l1.max(1.0).powf(1.5) {
                return fail(format!("gradient {norm:e} at stationary point λ = {li}"));
            }
            if i != order[0] {
                let hv = hessian_apply(&a, &x, &v1);
                let curv: f64 = hv.iter().zip(v1.iter()).map(|(a, b)| a * b).sum();
                let want = 4.0 * (li - l1);
                if (curv - want).abs() > 1e-6 * want.abs() {
                    return fail(format!("saddle curvature {curv} vs {want}"));
                }
            }
            stationary += 1;
        }
    }
    Ok(format!("{stationary} stationary points checked"))
}

fn line_search(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 10;
    let a = build_synthetic(&SpectrumSpec::equispaced(n, 130.0, seed)).map_err(|e| e.to_string())?;
    let frob = frobenius_norm_sq(&a);
    for case in 0..300 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..6.0)).collect();
        let j = rng.random_range(0..n);
        let state = SolverState::new(&a, &x, 0).map_err(|e| e.to_string())?;
        let alpha = coord_ls_delta(&state, j, a.diag(j));
        let f0 = objective(&a, &x, frob);
        let h = |t: f64| {
            let mut y = x.clone();
            y[j] += t;
            objective(&a, &y, frob) - f0
        };
        let best = h(alpha);
        let span = 4.0 * (alpha.abs() + 10.0);
        let grid_min = (0..=4000)
            .map(|i| h(-span + 2.0 * span * i as f64 / 4000.0))
            .fold(f64::INFINITY, f64::min);
        if best > grid_min + 1e-8 * f0.max(1.0) {
            return fail(format!(
                "case {case}: line search {best:e} worse than grid {grid_min:e}"
            ));
        }
        let predicted = delta_f(alpha, &coord_cubic(&state, j, a.diag(j)));
        if (predicted - best).abs() > 1e-9 * f0.max(1.0) {
            return fail(format!("case {case}: Δf {predicted:e} vs direct {best:e}"));
        }
    }
    Ok("300 instances".into())
}

fn engine(seed: u64) -> Result<String, String> {
    let a = build_synthetic(&SpectrumSpec::equispaced(60, 108.0, seed)).map_err(|e| e.to_string())?;
    let reference = reference_eigenpair(&a).map_err(|e| e.to_string())?;
    let mut x0 = vec![0.0; 60];
    x0[0] = 1.0;
    for cfg in [
        StrategyConfig::new(Pick::GreedyLS, Update::CoordLS),
        StrategyConfig::new(Pick::GaussSouthwell, Update::CoordLS),
        StrategyConfig::new(Pick::GradPower(1.0), Update::CoordLS).with_k(3),
        StrategyConfig::new(Pick::GradPower(2.0), Update::VecLS).with_k(4),
    ] {
        let monotone = Method::Coordinate(cfg).is_monotone();
        let mut st = SolverState::new(&a, &x0, seed).map_err(|e| e.to_string())?;
        let mut gap = st.objective_gap(reference.lambda1);
        for it in 0..500 {
            step(&mut st, &a, &cfg).map_err(|e| e.to_string())?;
            let g = st.objective_gap(reference.lambda1);
            if monotone && g > gap + 1e-9 * reference.fstar {
                return fail(format!("{cfg}: objective rose at iteration {it}"));
            }
            gap = g;
        }
        let before: Vec<f64> = st.z().to_vec();
        st.revalidate(&a);
        let drift = before
            .iter()
            .zip(st.z())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        if drift > 1e-8 * reference.lambda1 {
            return fail(format!("{cfg}: z drifted by {drift:e}"));
        }
    }
    let method = Method::Coordinate(StrategyConfig::new(Pick::GradPower(1.0), Update::CoordLS).with_k(4));
    let exp = ExperimentConfig::new(method, x0, 1e-12, 2000, vec![1, 2]);
    let runs = run_seeds(&a, &reference, &exp).map_err(|e| e.to_string())?;
    for run in &runs {
        if run.column_accesses > 2000 + 4 {
            return fail(format!("budget overshoot: {}", run.column_accesses));
        }
    }
    let again = run_seeds(&a, &reference, &exp).map_err(|e| e.to_string())?;
    if runs.iter().zip(again.iter()).any(|(p, q)| p.trace != q.trace) {
        return fail("seeded runs are not reproducible".into());
    }
    Ok("descent, drift, budget and reproducibility".into())
}

fn operator(seed: u64) -> Result<String, String> {
    let a = build_synthetic(&SpectrumSpec::equispaced(30, 108.0, seed)).map_err(|e| e.to_string())?;
    let shifted = ShiftScale::new(&a, -2.0, 7.0);
    let (mut b1, mut b2) = (ColumnBuf::new(), ColumnBuf::new());
    for j in 0..30 {
        let c = a.column(j, &mut b1).to_pairs();
        let s = shifted.column(j, &mut b2);
        for (i, v) in c {
            let want = -2.0 * v + if i == j { 7.0 } else { 0.0 };
            if (s.get(i) - want).abs() > 1e-12 * v.abs().max(1.0) {
                return fail(format!("shifted column {j} row {i}"));
            }
        }
    }
    let eig = a.to_nalgebra().symmetric_eigen();
    let want: f64 = eig.eigenvalues.iter().map(|l| l * l).sum();
    let got = frobenius_norm_sq(&a);
    if (got - want).abs() > 1e-9 * want {
        return fail(format!("Frobenius norm {got} vs spectrum {want}"));
    }
    Ok("shift/scale columns and Frobenius identity".into())
}

fn hubbard(seed: u64) -> Result<String, String> {
    let h = HubbardHamiltonian::new(LatticeSpec::square4(3, 3), DEFAULT_DIM_CAP).map_err(|e| e.to_string())?;
    if h.dim() != 19600 {
        return fail(format!("dimension {}", h.dim()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..200 {
        let j = rng.random_range(0..h.dim());
        let col = h.hamiltonian_column(j).map_err(|e| e.to_string())?;
        for &(i, v) in &col {
            if i == j {
                continue;
            }
            if v.abs() != 0.25 {
                return fail(format!("off-diagonal H[{i},{j}] = {v}"));
            }
            let back = h.hamiltonian_column(i).map_err(|e| e.to_string())?;
            if back.iter().find(|e| e.0 == j).map(|e| e.1) != Some(v) {
                return fail(format!("H[{i},{j}] ≠ H[{j},{i}]"));
            }
        }
    }
    Ok("19600 states, ±0.25 couplings, symmetric".into())
}

/// Runs every suite.
pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        Check {
            name: "operator",
            result: operator(seed),
        },
        Check {
            name: "landscape",
            result: landscape(seed),
        },
        Check {
            name: "line search",
            result: line_search(seed),
        },
        Check {
            name: "engine",
            result: engine(seed),
        },
        Check {
            name: "hubbard",
            result: hubbard(seed),
        },
    ]
}
