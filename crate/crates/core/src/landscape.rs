//! Direct evaluations of `f(x) = ‖A − xxᵀ‖²_F`, its derivatives, its
//! stationary points and the local constants that govern convergence near
//! the minimizers. These are used as test oracles and by `levp verify`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::engine::{step, stepsize_bound, Pick, SolverState, StrategyConfig, Update};
use crate::error::{Error, Result};
use crate::operator::{setup_matvec, ColumnOracle};

/// `f(x) = ‖A‖²_F − 2xᵀAx + (xᵀx)²`, evaluating `Ax` directly.
pub fn objective<O: ColumnOracle + ?Sized>(oracle: &O, x: &[f64], frob_sq: f64) -> f64 {
    let ax = setup_matvec(oracle, x);
    let xax: f64 = x.iter().zip(ax.iter()).map(|(a, b)| a * b).sum();
    let nu: f64 = x.iter().map(|v| v * v).sum();
    frob_sq - 2.0 * xax + nu * nu
}

/// `∇f = −4z + 4νx` for `z = Ax`, `ν = ‖x‖²`.
pub fn gradient(x: &[f64], z: &[f64], nu: f64) -> Vec<f64> {
    x.iter().zip(z.iter()).map(|(&x, &z)| 4.0 * (nu * x - z)).collect()
}

/// `∇²f(x)·w = −4Aw + 8x(xᵀw) + 4(xᵀx)w`.
pub fn hessian_apply<O: ColumnOracle + ?Sized>(oracle: &O, x: &[f64], w: &[f64]) -> Vec<f64> {
    let aw = setup_matvec(oracle, w);
    let xw: f64 = x.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
    let nu: f64 = x.iter().map(|v| v * v).sum();
    aw.iter()
        .zip(x.iter().zip(w.iter()))
        .map(|(&aw, (&x, &w))| -4.0 * aw + 8.0 * x * xw + 4.0 * nu * w)
        .collect()
}

/// Dense Hessian `−4A + 8xxᵀ + 4(xᵀx)I`.
pub fn dense_hessian(a: &DMatrix<f64>, x: &[f64]) -> DMatrix<f64> {
    let xv = DVector::from_column_slice(x);
    let nu = xv.norm_squared();
    let n = x.len();
    a * -4.0 + &xv * xv.transpose() * 8.0 + DMatrix::identity(n, n) * (4.0 * nu)
}

/// `√λ·v`, the stationary point attached to a positive eigenpair.
pub fn stationary_point(lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidSpectrum(format!(
            "stationary points need a positive eigenvalue, got {lambda}"
        )));
    }
    let norm: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidSpectrum(format!("eigenvector norm {norm} is not 1")));
    }
    let r = lambda.sqrt();
    Ok(v.iter().map(|a| r * a).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeConstants {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Coordinate-wise Lipschitz constant of `∇f` on the balls `B±`.
    pub lipschitz: f64,
    /// Strong-convexity constant on `B±`.
    pub mu2: f64,
    /// Radius of `B±` around `±√λ₁·v₁`.
    pub radius_b: f64,
    /// Largest stepsize with guaranteed convergence for cyclic fixed-step
    /// descent.
    pub gamma_max: f64,
}

pub fn constants<O: ColumnOracle + ?Sized>(oracle: &O, lambda1: f64, lambda2: f64) -> Result<LandscapeConstants> {
    if !(lambda1 > 0.0) || !(lambda1 > lambda2) {
        return Err(Error::InvalidSpectrum(format!(
            "need λ₁ > max(0, λ₂), got λ₁ = {lambda1}, λ₂ = {lambda2}"
        )));
    }
    let gap = (2.0 * lambda1).min(lambda1 - lambda2);
    let max_diag = (0..oracle.dim()).fold(0.0f64, |m, i| m.max(oracle.diag(i).abs()));
    Ok(LandscapeConstants {
        lambda1,
        lambda2,
        lipschitz: 12.0 * lambda1 + 2.0 * gap + 4.0 * max_diag,
        mu2: 3.0 * gap,
        radius_b: gap / (30.0 * lambda1.sqrt()),
        gamma_max: stepsize_bound(oracle),
    })
}

/// Second-order stationary points reached by exact-line-search descent
/// from `starts` Gaussian starting points scaled to `‖x‖ = √λ₁`.
///
/// Each start runs cyclic coordinate line search until `‖∇f‖ < 1e-10`;
/// points with `‖∇f‖ < 1e-8` and a Hessian spectrum bounded below by
/// `−1e-8·scale` are returned.
pub fn second_order_points<O: ColumnOracle + ?Sized>(
    oracle: &O,
    lambda1: f64,
    starts: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let n = oracle.dim();
    let a = crate::operator::to_dense(oracle);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = StrategyConfig::new(Pick::Cyclic, Update::CoordLS);
    let mut found = Vec::new();
    for s in 0..starts {
        let mut x0: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
        x0.iter_mut().for_each(|v| *v *= lambda1.sqrt() / norm);
        let mut st = SolverState::new(oracle, &x0, s as u64)?;
        let mut grad_norm = f64::INFINITY;
        for sweep in 0..200_000 {
            for _ in 0..n {
                step(&mut st, oracle, &cfg)?;
            }
            if sweep % 10 == 9 {
                st.revalidate(oracle);
                let g = gradient(st.x(), st.z(), st.nu());
                grad_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if grad_norm < 1e-10 {
                    break;
                }
            }
        }
        if grad_norm >= 1e-8 {
            continue;
        }
        let h = dense_hessian(&a, st.x());
        let scale = h.amax().max(1.0);
        let min_eig = h.symmetric_eigen().eigenvalues.min();
        if min_eig >= -1e-8 * scale {
            found.push(st.x().to_vec());
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{build_synthetic, frobenius_norm_sq, DenseSymmetric, SpectrumSpec};

    #[test]
    fn objective_at_origin_and_minimizer() {
        let a = DenseSymmetric::from_diagonal(&[3.0, 2.0, 1.0]).unwrap();
        let frob = frobenius_norm_sq(&a);
        assert_eq!(objective(&a, &[0.0; 3], frob), 14.0);
        let x = stationary_point(3.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!((objective(&a, &x, frob) - (14.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_entrywise_norm() {
        let a = build_synthetic(&SpectrumSpec::equispaced(20, 130.0, 4)).unwrap();
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.37).sin()).collect();
        let m = a.to_nalgebra();
        let xv = DVector::from_column_slice(&x);
        let direct = (&m - &xv * xv.transpose()).norm_squared();
        let got = objective(&a, &x, frobenius_norm_sq(&a));
        assert!((got - direct).abs() <= 1e-10 * direct);
    }

    #[test]
    fn stationary_points_and_rejections() {
        let a = DenseSymmetric::from_diagonal(&[2.0, 1.0]).unwrap();
        let x = stationary_point(1.0, &[0.0, 1.0]).unwrap();
        assert_eq!(x, vec![0.0, 1.0]);
        let z = setup_matvec(&a, &x);
        assert_eq!(gradient(&x, &z, 1.0), vec![0.0, 0.0]);
        assert!(stationary_point(0.0, &[1.0, 0.0]).is_err());
        assert!(stationary_point(-1.0, &[1.0, 0.0]).is_err());
        assert!(stationary_point(1.0, &[2.0, 0.0]).is_err());
        assert_eq!(gradient(&[0.0, 0.0], &[0.0, 0.0], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn hessian_directions_at_stationary_points() {
        let a = DenseSymmetric::from_diagonal(&[5.0, 2.0, 1.0]).unwrap();
        let v1 = [1.0, 0.0, 0.0];
        let saddle = stationary_point(2.0, &[0.0, 1.0, 0.0]).unwrap();
        let hv = hessian_apply(&a, &saddle, &v1);
        assert!((hv[0] - 4.0 * (2.0 - 5.0)).abs() < 1e-12);
        assert_eq!(&hv[1..], &[0.0, 0.0]);
        let min = stationary_point(5.0, &v1).unwrap();
        let hv = hessian_apply(&a, &min, &v1);
        assert!((hv[0] - 8.0 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn constants_diag_four_one() {
        let a = DenseSymmetric::from_diagonal(&[4.0, 1.0]).unwrap();
        let c = constants(&a, 4.0, 1.0).unwrap();
        assert_eq!(c.lipschitz, 70.0);
        assert_eq!(c.mu2, 9.0);
        assert!((c.radius_b - 0.05).abs() < 1e-15);
        assert!(constants(&a, 1.0, 4.0).is_err());
        assert!(constants(&a, -1.0, -2.0).is_err());
    }

    #[test]
    fn constants_pick_spectral_gap_for_positive_lambda2() {
        let a = build_synthetic(&SpectrumSpec::equispaced(30, 108.0, 1)).unwrap();
        let c = constants(&a, 108.0, 100.0).unwrap();
        let max_diag = (0..30).fold(0.0f64, |m, i| m.max(a.diag(i).abs()));
        assert!((c.lipschitz - (1296.0 + 16.0 + 4.0 * max_diag)).abs() < 1e-9);
        assert_eq!(c.mu2, 24.0);
    }
    #[test]
    fn constants_bound_the_hessian_inside_the_ball() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let n = 40;
        let a = build_synthetic(&SpectrumSpec::equispaced(n, 108.0, 5)).unwrap();
        let eig = a.to_nalgebra().symmetric_eigen();
        let top = eig.eigenvalues.imax();
        let lambda2 = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != top)
            .fold(f64::NEG_INFINITY, |m, (_, &v)| m.max(v));
        let c = constants(&a, eig.eigenvalues[top], lambda2).unwrap();
        let center: Vec<f64> = eig
            .eigenvectors
            .column(top)
            .iter()
            .map(|v| v * c.lambda1.sqrt())
            .collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let dense = a.to_nalgebra();
        for _ in 0..200 {
            let w: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            let x: Vec<f64> = center.iter().zip(&w).map(|(p, d)| p + c.radius_b * d / norm).collect();
            let h = dense_hessian(&dense, &x);
            assert!((0..n).all(|j| h[(j, j)] <= c.lipschitz));
            assert!(h.symmetric_eigen().eigenvalues.min() >= c.mu2);
        }
    }
}
