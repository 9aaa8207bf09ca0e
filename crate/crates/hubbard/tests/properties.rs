use levp_hubbard::{enumerate_sector_at, HubbardHamiltonian, LatticeSpec, Momentum};
use proptest::prelude::*;

fn small_lattice() -> impl Strategy<Value = LatticeSpec> {
    (1usize..4, 1usize..4, 0.5f64..2.0, 0.0f64..8.0).prop_flat_map(|(l1, l2, t_hop, u)| {
        let n = l1 * l2;
        (0..=n, 0..=n).prop_map(move |(n_up, n_down)| LatticeSpec {
            l1,
            l2,
            t_hop,
            u,
            n_up,
            n_down,
        })
    })
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn sectors(spec: &LatticeSpec) -> Vec<Momentum> {
    (0..spec.l1)
        .flat_map(|a| (0..spec.l2).map(move |b| Momentum(a, b)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sectors_partition_the_fock_space(spec in small_lattice()) {
        let total: usize = sectors(&spec)
            .into_iter()
            .map(|k| enumerate_sector_at(&spec, k, usize::MAX).unwrap().dim())
            .sum();
        let n = spec.n_orb();
        prop_assert_eq!(total, binomial(n, spec.n_up) * binomial(n, spec.n_down));
    }

    #[test]
    fn every_sector_is_symmetric_and_closed(spec in small_lattice(), pick in 0usize..9) {
        let all = sectors(&spec);
        let sector = all[pick % all.len()];
        let basis = enumerate_sector_at(&spec, sector, usize::MAX).unwrap();
        prop_assume!(basis.dim() > 0);
        let ham = HubbardHamiltonian::with_basis(spec, basis).unwrap();
        let dim = ham.basis().dim();
        let mut dense = vec![0.0; dim * dim];
        for j in 0..dim {
            for (i, v) in ham.hamiltonian_column(j).unwrap() {
                prop_assert!(i < dim);
                dense[i * dim + j] += v;
            }
        }
        for i in 0..dim {
            for j in 0..i {
                prop_assert!((dense[i * dim + j] - dense[j * dim + i]).abs() <= 1e-14);
            }
        }
        // The trace is the sum over the sector of kinetic plus interaction.
        let trace: f64 = (0..dim).map(|i| dense[i * dim + i]).sum();
        let interaction = spec.u / spec.n_orb() as f64 * (spec.n_up * spec.n_down) as f64;
        let kinetic: f64 = ham
            .basis()
            .states()
            .iter()
            .map(|d| {
                (0..spec.n_orb())
                    .filter(|r| d.up >> r & 1 == 1)
                    .chain((0..spec.n_orb()).filter(|r| d.down >> r & 1 == 1))
                    .map(|r| ham.dispersions()[r])
                    .sum::<f64>()
            })
            .sum();
        prop_assert!((trace - (spec.t_hop * kinetic + interaction * dim as f64)).abs() <= 1e-9 * (1.0 + trace.abs()));
    }
}
