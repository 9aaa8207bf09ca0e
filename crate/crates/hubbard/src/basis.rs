use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::lattice::{hf_determinant, Determinant, LatticeSpec, Momentum};

/// Largest sector [`enumerate_sector`] builds unless told otherwise.
pub const DEFAULT_DIM_CAP: usize = 20_000_000;

/// Determinants of one total-momentum sector, sorted by `(up, down)`.
#[derive(Debug, Clone)]
pub struct MomentumBasis {
    sector: Momentum,
    states: Vec<Determinant>,
    index_of: FxHashMap<u64, u32>,
}

impl MomentumBasis {
    pub fn sector(&self) -> Momentum {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Determinant] {
        &self.states
    }

    pub fn state(&self, index: usize) -> Result<Determinant> {
        self.states.get(index).copied().ok_or(Error::StateOutOfRange {
            index,
            dim: self.states.len(),
        })
    }

    pub fn index_of(&self, det: Determinant) -> Option<usize> {
        self.index_of.get(&det.key()).map(|&i| i as usize)
    }
}

/// All `n`-bit-set masks over `bits` bits in ascending order.
fn masks_with_popcount(bits: usize, n: usize) -> Vec<u32> {
    if n == 0 {
        return vec![0];
    }
    let limit = 1u64 << bits;
    let mut out = Vec::new();
    let mut m = (1u64 << n) - 1;
    while m < limit {
        out.push(m as u32);
        // Next larger integer with the same popcount.
        let low = m & m.wrapping_neg();
        let ripple = m + low;
        m = (((ripple ^ m) >> 2) / low) | ripple;
    }
    out
}

/// Down masks grouped by their momentum, each group ascending.
fn down_by_momentum(spec: &LatticeSpec) -> FxHashMap<Momentum, Vec<u32>> {
    let mut groups: FxHashMap<Momentum, Vec<u32>> = FxHashMap::default();
    for m in masks_with_popcount(spec.n_orb(), spec.n_down) {
        groups.entry(spec.mask_momentum(m)).or_default().push(m);
    }
    groups
}

fn for_each_state(spec: &LatticeSpec, sector: Momentum, mut f: impl FnMut(u32, &[u32])) {
    let downs = down_by_momentum(spec);
    for up in masks_with_popcount(spec.n_orb(), spec.n_up) {
        let need = spec.sub(sector, spec.mask_momentum(up));
        if let Some(group) = downs.get(&need) {
            f(up, group);
        }
    }
}

/// Size of the sector containing the HF determinant, without building it.
pub fn sector_dimension(spec: &LatticeSpec) -> Result<usize> {
    let sector = spec.total_momentum(hf_determinant(spec)?);
    let mut dim = 0;
    for_each_state(spec, sector, |_, group| dim += group.len());
    Ok(dim)
}

/// Enumerates the sector of the HF determinant; fails if it has more than
/// `cap` states.
pub fn enumerate_sector(spec: &LatticeSpec, cap: usize) -> Result<MomentumBasis> {
    let sector = spec.total_momentum(hf_determinant(spec)?);
    enumerate_sector_at(spec, sector, cap)
}

/// Enumerates the sector of total momentum `sector`.
pub fn enumerate_sector_at(spec: &LatticeSpec, sector: Momentum, cap: usize) -> Result<MomentumBasis> {
    spec.validate()?;
    let mut dim = 0;
    for_each_state(spec, sector, |_, group| dim += group.len());
    if dim > cap || dim > u32::MAX as usize {
        return Err(Error::DimensionCap { dim, cap });
    }
    let mut states = Vec::with_capacity(dim);
    for_each_state(spec, sector, |up, group| {
        states.extend(group.iter().map(|&down| Determinant { up, down }));
    });
    let mut index_of = FxHashMap::with_capacity_and_hasher(dim, Default::default());
    for (i, d) in states.iter().enumerate() {
        index_of.insert(d.key(), i as u32);
    }
    Ok(MomentumBasis {
        sector,
        states,
        index_of,
    })
}
