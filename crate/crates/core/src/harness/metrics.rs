use crate::error::{Error, Result};

/// `ε_obj = √(max(f − f*, 0)/f*)`.
pub fn eps_obj(f_value: f64, fstar: f64) -> Result<f64> {
    if !(fstar > 0.0) {
        return Err(Error::Undefined("ε_obj needs f* > 0"));
    }
    Ok(eps_obj_from_gap(f_value - fstar, fstar))
}

/// `ε_obj` from the gap `f − f*` directly.
pub fn eps_obj_from_gap(gap: f64, fstar: f64) -> f64 {
    (gap.max(0.0) / fstar).sqrt()
}

/// Reference vector `x_*` of the projected-energy estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceVector {
    Dense(Vec<f64>),
    /// `amplitude·e_index`; the estimator is then `z_i/x_i`.
    Unit {
        index: usize,
        amplitude: f64,
    },
}

impl ReferenceVector {
    /// Projected energy `E = x_*ᵀz / x_*ᵀx` with `z = Ax`.
    pub fn projected_energy(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        let (num, den) = match self {
            ReferenceVector::Dense(r) => (
                r.iter().zip(z.iter()).map(|(a, b)| a * b).sum::<f64>(),
                r.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>(),
            ),
            ReferenceVector::Unit { index, amplitude } => (amplitude * z[*index], amplitude * x[*index]),
        };
        if den == 0.0 {
            return Err(Error::Undefined("reference vector has zero overlap with the iterate"));
        }
        Ok(num / den)
    }
}

/// `|E − λ₁| / |λ₁|`.
pub fn eps_energy(energy: f64, lambda1: f64) -> f64 {
    (energy - lambda1).abs() / lambda1.abs()
}

/// `tan θ(x, v₁) = ‖x − (v₁ᵀx)v₁‖ / |v₁ᵀx|` for unit `v₁`; infinite when
/// `x ⊥ v₁`.
pub fn eps_tan(x: &[f64], v1: &[f64]) -> f64 {
    let overlap: f64 = x.iter().zip(v1.iter()).map(|(a, b)| a * b).sum();
    if overlap == 0.0 {
        return f64::INFINITY;
    }
    let perp = x
        .iter()
        .zip(v1.iter())
        .map(|(a, b)| (a - overlap * b).powi(2))
        .sum::<f64>()
        .sqrt();
    perp / overlap.abs()
}
