use levp_core::harness::{lanczos_top, LanczosOptions};
use levp_core::operator::{ColumnBuf, ColumnOracle, ColumnView, ShiftScale, SparseColumns};
use rayon::prelude::*;

use crate::basis::{enumerate_sector, MomentumBasis};
use crate::error::{Error, Result};
use crate::lattice::{dispersion, hf_determinant, Determinant, LatticeSpec, Momentum};

/// Sectors up to this size are materialized before running Lanczos.
const MATERIALIZE_LIMIT: usize = 200_000;

/// The momentum-space Hamiltonian restricted to one sector. Columns are
/// generated on demand from the determinant basis.
#[derive(Debug, Clone)]
pub struct HubbardHamiltonian {
    spec: LatticeSpec,
    basis: MomentumBasis,
    eps: Vec<f64>,
    diag: Vec<f64>,
    coupling: f64,
}

/// Occupied orbitals of `mask` strictly below `r`.
fn below(mask: u32, r: usize) -> u32 {
    (mask & ((1u32 << r) - 1)).count_ones()
}

fn orbitals(mask: u32) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        (m != 0).then(|| {
            let r = m.trailing_zeros() as usize;
            m &= m - 1;
            r
        })
    })
}

impl HubbardHamiltonian {
    pub fn new(spec: LatticeSpec, cap: usize) -> Result<Self> {
        let basis = enumerate_sector(&spec, cap)?;
        Self::with_basis(spec, basis)
    }

    pub fn with_basis(spec: LatticeSpec, basis: MomentumBasis) -> Result<Self> {
        spec.validate()?;
        let eps = (0..spec.n_orb())
            .map(|r| dispersion(&spec, r))
            .collect::<Result<Vec<_>>>()?;
        let coupling = spec.u / spec.n_orb() as f64;
        let interaction = coupling * (spec.n_up * spec.n_down) as f64;
        let diag = basis
            .states()
            .par_iter()
            .map(|d| {
                let kinetic: f64 = orbitals(d.up).chain(orbitals(d.down)).map(|r| eps[r]).sum();
                spec.t_hop * kinetic + interaction
            })
            .collect();
        Ok(Self {
            spec,
            basis,
            eps,
            diag,
            coupling,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn basis(&self) -> &MomentumBasis {
        &self.basis
    }

    /// `U/N_orb`, the magnitude of every off-diagonal entry.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn dispersions(&self) -> &[f64] {
        &self.eps
    }

    /// Index of the HF determinant in the basis.
    pub fn hf_index(&self) -> Result<usize> {
        let hf = hf_determinant(&self.spec)?;
        self.basis
            .index_of(hf)
            .ok_or_else(|| Error::InvalidSpec("HF determinant missing from its own sector".into()))
    }

    /// Determinants connected to `source` by the two-body term, with their
    /// fermionic signs. Scatters an up electron `p → p − q` and a down
    /// electron `k → k + q` for every `q ≠ 0`.
    pub fn excitations(&self, source: Determinant) -> Vec<(Determinant, f64)> {
        let mut out = Vec::new();
        self.for_each_excitation(source, |d, sign| out.push((d, sign)));
        out
    }

    fn for_each_excitation(&self, source: Determinant, mut f: impl FnMut(Determinant, f64)) {
        let s = &self.spec;
        let Determinant { up, down } = source;
        for p in orbitals(up) {
            let kp = s.momentum_of(p);
            let up_removed = up & !(1 << p);
            let sign_p = below(up, p);
            for k in orbitals(down) {
                let kk = s.momentum_of(k);
                let down_removed = down & !(1 << k);
                let sign_k = below(down, k);
                for q in 1..s.n_orb() {
                    let kq = s.momentum_of(q);
                    let p_new = s.orbital_of(s.sub(kp, kq));
                    let k_new = s.orbital_of(s.add(kk, kq));
                    if up_removed & (1 << p_new) != 0 || down_removed & (1 << k_new) != 0 {
                        continue;
                    }
                    // Down operators each pass the whole up block, which
                    // holds the same number of electrons before and after,
                    // so only within-block counts matter.
                    let parity = sign_p + below(up_removed, p_new) + sign_k + below(down_removed, k_new);
                    let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
                    f(
                        Determinant {
                            up: up_removed | (1 << p_new),
                            down: down_removed | (1 << k_new),
                        },
                        sign,
                    );
                }
            }
        }
    }

    fn fill_column(&self, j: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        out.push((j, self.diag[j]));
        let source = self.basis.states()[j];
        self.for_each_excitation(source, |target, sign| {
            let i = self
                .basis
                .index_of(target)
                .expect("two-body scattering conserves momentum");
            out.push((i, sign * self.coupling));
        });
        out.sort_unstable_by_key(|&(i, _)| i);
    }

    /// Sparse column `H[:, j]` sorted by row, diagonal included.
    pub fn hamiltonian_column(&self, j: usize) -> Result<Vec<(usize, f64)>> {
        if j >= self.dim() {
            return Err(Error::StateOutOfRange {
                index: j,
                dim: self.dim(),
            });
        }
        let mut out = Vec::new();
        self.fill_column(j, &mut out);
        Ok(out)
    }

    /// Nonzero count per column over the whole sector.
    pub fn nnz_stats(&self) -> NnzStats {
        let mut counts: Vec<usize> = (0..self.dim())
            .into_par_iter()
            .map_init(Vec::new, |buf, j| {
                self.fill_column(j, buf);
                buf.iter().filter(|(_, v)| *v != 0.0).count()
            })
            .collect();
        counts.sort_unstable();
        let total = counts.iter().sum();
        NnzStats {
            min: counts.first().copied().unwrap_or(0),
            median: counts.get(counts.len().saturating_sub(1) / 2).copied().unwrap_or(0),
            max: counts.last().copied().unwrap_or(0),
            total,
        }
    }

    pub fn info(&self) -> Result<HubbardInfo> {
        let (lo, hi) = self
            .diag
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| {
                (lo.min(d), hi.max(d))
            });
        Ok(HubbardInfo {
            dim: self.dim(),
            sector: self.basis.sector(),
            hf_index: self.hf_index()?,
            nnz: self.nnz_stats(),
            diag_min: lo,
            diag_max: hi,
        })
    }
}

impl ColumnOracle for HubbardHamiltonian {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn diag(&self, j: usize) -> f64 {
        self.diag[j]
    }

    fn column<'a>(&'a self, j: usize, buf: &'a mut ColumnBuf) -> ColumnView<'a> {
        let mut pairs = Vec::with_capacity(128);
        self.fill_column(j, &mut pairs);
        buf.fill_sparse(pairs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NnzStats {
    pub min: usize,
    /// Lower median.
    pub median: usize,
    pub max: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HubbardInfo {
    pub dim: usize,
    pub sector: Momentum,
    pub hf_index: usize,
    pub nnz: NnzStats,
    pub diag_min: f64,
    pub diag_max: f64,
}

/// Lowest eigenvalues of `H`, ascending, and the ground-state vector.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energies: Vec<f64>,
    pub vector: Vec<f64>,
}

/// Lanczos on `shift·I − H`, mapping the leading eigenvalues back to the
/// lowest of `H`. The shift must exceed the spectral radius of `H` for the
/// leading pairs of the shifted operator to be the ground states.
pub fn ground_state_reference(ham: &HubbardHamiltonian, shift: f64, opts: &LanczosOptions) -> Result<GroundState> {
    let shifted = ShiftScale::new(ham, -1.0, shift);
    let pairs = if ham.dim() <= MATERIALIZE_LIMIT {
        lanczos_top(&SparseColumns::from_oracle(&shifted), opts)?
    } else {
        lanczos_top(&shifted, opts)?
    };
    let mut pairs = pairs.into_iter();
    let (top, vector) = pairs.next().ok_or(Error::Solver(levp_core::Error::Undefined(
        "Lanczos returned no eigenpairs",
    )))?;
    let energies = std::iter::once(shift - top)
        .chain(pairs.map(|(theta, _)| shift - theta))
        .collect();
    Ok(GroundState { energies, vector })
}
