use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Lattice and filling. Orbital `r = (r₁, r₂)` has index `r₁·L2 + r₂` and
/// wave vector `(2πr₁/L1, 2πr₂/L2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub l1: usize,
    pub l2: usize,
    pub t_hop: f64,
    pub u: f64,
    pub n_up: usize,
    pub n_down: usize,
}

/// A lattice momentum, component-wise modulo `(L1, L2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Momentum(pub usize, pub usize);

impl fmt::Display for Momentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

/// Occupations of the momentum orbitals; bit `r` set means orbital `r` is
/// occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Determinant {
    pub up: u32,
    pub down: u32,
}

impl Determinant {
    pub(crate) fn key(self) -> u64 {
        (u64::from(self.up) << 32) | u64::from(self.down)
    }
}

impl LatticeSpec {
    /// The 4×4 lattice with `t = 1`, `U = 4`.
    pub fn square4(n_up: usize, n_down: usize) -> Self {
        Self {
            l1: 4,
            l2: 4,
            t_hop: 1.0,
            u: 4.0,
            n_up,
            n_down,
        }
    }

    pub fn n_orb(&self) -> usize {
        self.l1 * self.l2
    }

    pub fn validate(&self) -> Result<()> {
        if self.l1 == 0 || self.l2 == 0 {
            return Err(Error::InvalidSpec("lattice sides must be positive".into()));
        }
        let n = self.n_orb();
        if n > 32 {
            return Err(Error::InvalidSpec(format!(
                "{n} orbitals exceed the 32-bit determinant masks"
            )));
        }
        if self.n_up > n || self.n_down > n {
            return Err(Error::InvalidSpec(format!(
                "{} up / {} down electrons do not fit in {n} orbitals",
                self.n_up, self.n_down
            )));
        }
        if !self.t_hop.is_finite() || !self.u.is_finite() {
            return Err(Error::InvalidSpec("t and U must be finite".into()));
        }
        Ok(())
    }

    pub fn momentum_of(&self, r: usize) -> Momentum {
        Momentum(r / self.l2, r % self.l2)
    }

    pub fn orbital_of(&self, k: Momentum) -> usize {
        k.0 * self.l2 + k.1
    }

    pub fn add(&self, a: Momentum, b: Momentum) -> Momentum {
        Momentum((a.0 + b.0) % self.l1, (a.1 + b.1) % self.l2)
    }

    pub fn sub(&self, a: Momentum, b: Momentum) -> Momentum {
        Momentum((a.0 + self.l1 - b.0) % self.l1, (a.1 + self.l2 - b.1) % self.l2)
    }

    /// Total momentum of the occupied orbitals of `mask`.
    pub fn mask_momentum(&self, mask: u32) -> Momentum {
        let mut k = Momentum(0, 0);
        let mut m = mask;
        while m != 0 {
            let r = m.trailing_zeros() as usize;
            k = self.add(k, self.momentum_of(r));
            m &= m - 1;
        }
        k
    }

    pub fn total_momentum(&self, det: Determinant) -> Momentum {
        self.add(self.mask_momentum(det.up), self.mask_momentum(det.down))
    }
}

fn field<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad value for `{key}`: `{value}`")))
}

impl FromStr for LatticeSpec {
    type Err = Error;

    /// Parses `l1=4,l2=4,nup=3,ndown=3,t=1,u=4`; `t` and `u` default to 1
    /// and 4.
    fn from_str(s: &str) -> Result<Self> {
        let mut spec = LatticeSpec::square4(0, 0);
        let (mut has_up, mut has_down) = (false, false);
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got `{part}`")))?;
            match key.trim() {
                "l1" => spec.l1 = field(key, value)?,
                "l2" => spec.l2 = field(key, value)?,
                "nup" => {
                    spec.n_up = field(key, value)?;
                    has_up = true;
                }
                "ndown" => {
                    spec.n_down = field(key, value)?;
                    has_down = true;
                }
                "t" => spec.t_hop = field(key, value)?,
                "u" => spec.u = field(key, value)?,
                other => return Err(Error::InvalidSpec(format!("unknown key `{other}`"))),
            }
        }
        if !has_up || !has_down {
            return Err(Error::InvalidSpec("nup and ndown are required".into()));
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// `ε(k) = −2(cos k₁ + cos k₂)` for orbital `r`.
pub fn dispersion(spec: &LatticeSpec, r: usize) -> Result<f64> {
    let n_orb = spec.n_orb();
    if r >= n_orb {
        return Err(Error::OrbitalOutOfRange { index: r, n_orb });
    }
    let Momentum(r1, r2) = spec.momentum_of(r);
    let k1 = 2.0 * PI * r1 as f64 / spec.l1 as f64;
    let k2 = 2.0 * PI * r2 as f64 / spec.l2 as f64;
    Ok(-2.0 * (k1.cos() + k2.cos()))
}

/// Wave vector of orbital `r` folded into `(−π, π]²`, in units of `2π/L`.
fn centered(spec: &LatticeSpec, r: usize) -> (i64, i64) {
    let fold = |v: usize, l: usize| {
        let (v, l) = (v as i64, l as i64);
        if 2 * v > l {
            v - l
        } else {
            v
        }
    };
    let Momentum(r1, r2) = spec.momentum_of(r);
    (fold(r1, spec.l1), fold(r2, spec.l2))
}

/// Orbitals sorted by `ε`, degenerate ones (within 1e-12) by their wave
/// vector in `(−π, π]²`, lexicographically.
fn filling_order(spec: &LatticeSpec) -> Vec<usize> {
    let eps: Vec<f64> = (0..spec.n_orb())
        .map(|r| dispersion(spec, r).unwrap_or(f64::NAN))
        .collect();
    let mut order: Vec<usize> = (0..spec.n_orb()).collect();
    order.sort_by(|&a, &b| {
        if (eps[a] - eps[b]).abs() <= 1e-12 {
            centered(spec, a).cmp(&centered(spec, b))
        } else {
            eps[a].total_cmp(&eps[b])
        }
    });
    order
}

/// Lowest-dispersion filling per spin.
pub fn hf_determinant(spec: &LatticeSpec) -> Result<Determinant> {
    spec.validate()?;
    let order = filling_order(spec);
    let mask = |n: usize| order[..n].iter().fold(0u32, |m, &r| m | (1 << r));
    Ok(Determinant {
        up: mask(spec.n_up),
        down: mask(spec.n_down),
    })
}
