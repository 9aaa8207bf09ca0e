use std::path::{Path, PathBuf};
use std::str::FromStr;

use levp_core::harness::ReferenceVector;
use levp_core::operator::{build_synthetic, ColumnOracle, DenseSymmetric, ShiftScale, SparseColumns, SpectrumSpec};
use levp_hubbard::{HubbardHamiltonian, LatticeSpec, DEFAULT_DIM_CAP};

use crate::error::{usage, Error, Result};

/// Hubbard sectors up to this size are materialized once before solving.
const MATERIALIZE_LIMIT: usize = 200_000;

/// `n=500,l1=108,seed=0`: eigenvalue `l1` on top of `n − 1` values
/// equally spaced on `[1, 100)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub lambda1: f64,
    pub seed: u64,
}

impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut n, mut lambda1, mut seed) = (None, None, 0);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let Some((key, value)) = part.split_once('=') else {
                return usage(format!("expected key=value in synthetic spec, got `{part}`"));
            };
            let bad = || Error::Usage(format!("bad value for `{key}` in synthetic spec: `{value}`"));
            match key.trim() {
                "n" => n = Some(value.trim().parse().map_err(|_| bad())?),
                "l1" => lambda1 = Some(value.trim().parse().map_err(|_| bad())?),
                "seed" => seed = value.trim().parse().map_err(|_| bad())?,
                other => return usage(format!("unknown key `{other}` in synthetic spec")),
            }
        }
        match (n, lambda1) {
            (Some(n), Some(lambda1)) => Ok(Self { n, lambda1, seed }),
            _ => usage("synthetic spec needs n and l1"),
        }
    }
}

impl SyntheticSpec {
    pub fn build(&self) -> Result<DenseSymmetric> {
        Ok(build_synthetic(&SpectrumSpec::equispaced(
            self.n,
            self.lambda1,
            self.seed,
        ))?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    Synthetic(SyntheticSpec),
    Hubbard(LatticeSpec),
}

impl MatrixSource {
    /// `(scale, shift)` applied when none is given: `100I − H` for Hubbard,
    /// the matrix itself otherwise.
    pub fn default_transform(&self) -> (f64, f64) {
        match self {
            MatrixSource::Hubbard(_) => (-1.0, 100.0),
            _ => (1.0, 0.0),
        }
    }

    pub fn default_x0(&self) -> StartSpec {
        match self {
            MatrixSource::Hubbard(_) => StartSpec::Hf { amplitude: 10.0 },
            _ => StartSpec::Unit {
                index: 0,
                amplitude: 1.0,
            },
        }
    }
}

/// A problem ready to solve: `scale·A + shift·I` plus the HF index for
/// Hubbard problems.
pub struct Problem {
    pub oracle: Box<dyn ColumnOracle>,
    pub hf_index: Option<usize>,
    pub scale: f64,
    pub shift: f64,
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    /// Maps an eigenvalue of the solved operator back to the source matrix.
    pub fn unshift(&self, value: f64) -> f64 {
        (value - self.shift) / self.scale
    }
}

pub fn load_problem(source: &MatrixSource, scale: Option<f64>, shift: Option<f64>) -> Result<Problem> {
    let (default_scale, default_shift) = source.default_transform();
    let scale = scale.unwrap_or(default_scale);
    let shift = shift.unwrap_or(default_shift);
    if scale == 0.0 || !scale.is_finite() || !shift.is_finite() {
        return usage("scale must be finite and nonzero, shift finite");
    }
    let identity = scale == 1.0 && shift == 0.0;
    let (oracle, hf_index): (Box<dyn ColumnOracle>, _) = match source {
        MatrixSource::File(path) => {
            let a = DenseSymmetric::read_text(path)?;
            (wrap(a, identity, scale, shift), None)
        }
        MatrixSource::Synthetic(spec) => (wrap(spec.build()?, identity, scale, shift), None),
        MatrixSource::Hubbard(spec) => {
            let h = HubbardHamiltonian::new(*spec, DEFAULT_DIM_CAP)?;
            let hf = h.hf_index()?;
            let shifted = ShiftScale::new(h, scale, shift);
            let oracle: Box<dyn ColumnOracle> = if shifted.dim() <= MATERIALIZE_LIMIT {
                Box::new(SparseColumns::from_oracle(&shifted))
            } else {
                Box::new(shifted)
            };
            (oracle, Some(hf))
        }
    };
    Ok(Problem {
        oracle,
        hf_index,
        scale,
        shift,
    })
}

fn wrap(a: DenseSymmetric, identity: bool, scale: f64, shift: f64) -> Box<dyn ColumnOracle> {
    if identity {
        Box::new(a)
    } else {
        Box::new(ShiftScale::new(a, scale, shift))
    }
}

/// Starting vector: `e1`, `10*e5` (1-based), `hf`, `10*hf`, or
/// `file:PATH` with whitespace-separated entries.
#[derive(Debug, Clone, PartialEq)]
pub enum StartSpec {
    Unit { index: usize, amplitude: f64 },
    Hf { amplitude: f64 },
    File(PathBuf),
}

impl FromStr for StartSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(StartSpec::File(PathBuf::from(path)));
        }
        let (amplitude, unit) = match s.split_once('*') {
            Some((a, u)) => (
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad amplitude in start vector `{s}`")))?,
                u.trim(),
            ),
            None => (1.0, s),
        };
        if unit == "hf" {
            return Ok(StartSpec::Hf { amplitude });
        }
        let index = unit
            .strip_prefix('e')
            .and_then(|i| i.parse::<usize>().ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| {
                Error::Usage(format!(
                    "start vector must be eN, A*eN, hf, A*hf or file:PATH, got `{s}`"
                ))
            })?;
        Ok(StartSpec::Unit {
            index: index - 1,
            amplitude,
        })
    }
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Usage(format!("{}: bad number `{t}`", path.display())))
        })
        .collect()
}

impl StartSpec {
    /// The vector and the matching projected-energy reference.
    pub fn resolve(&self, problem: &Problem) -> Result<(Vec<f64>, ReferenceVector)> {
        let n = problem.dim();
        let unit = |index: usize, amplitude: f64| -> Result<(Vec<f64>, ReferenceVector)> {
            if index >= n {
                return usage(format!("start coordinate {} exceeds dimension {n}", index + 1));
            }
            let mut x = vec![0.0; n];
            x[index] = amplitude;
            Ok((x, ReferenceVector::Unit { index, amplitude }))
        };
        match self {
            StartSpec::Unit { index, amplitude } => unit(*index, *amplitude),
            StartSpec::Hf { amplitude } => match problem.hf_index {
                Some(i) => unit(i, *amplitude),
                None => usage("`hf` start needs a Hubbard matrix"),
            },
            StartSpec::File(path) => {
                let x = read_vector(path)?;
                if x.len() != n {
                    return usage(format!("{}: {} entries for dimension {n}", path.display(), x.len()));
                }
                Ok((x.clone(), ReferenceVector::Dense(x)))
            }
        }
    }
}
