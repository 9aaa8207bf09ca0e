use levp_core::engine::{
    coord_cubic, coord_ls_delta, pick_grad_power, step, Method, Pick, SolverState, StrategyConfig, Update,
};
use levp_core::landscape::objective;
use levp_core::operator::{frobenius_norm_sq, setup_matvec, ColumnBuf, ColumnOracle, DenseSymmetric, ShiftScale};
use levp_core::Error;
use proptest::prelude::*;

fn symmetric(n: usize) -> impl Strategy<Value = DenseSymmetric> {
    prop::collection::vec(-5.0f64..5.0, n * n)
        .prop_map(move |raw| DenseSymmetric::from_fn(n, |i, j| 0.5 * (raw[i * n + j] + raw[j * n + i])).unwrap())
}

fn problem() -> impl Strategy<Value = (DenseSymmetric, Vec<f64>)> {
    (2usize..9).prop_flat_map(|n| (symmetric(n), prop::collection::vec(-3.0f64..3.0, n)))
}

fn dense_column<O: ColumnOracle>(op: &O, j: usize) -> Vec<f64> {
    let mut out = vec![0.0; op.dim()];
    let mut buf = ColumnBuf::new();
    op.column(j, &mut buf).for_each(|i, v| out[i] += v);
    out
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn coordinate_methods() -> impl Strategy<Value = Method> {
    let pick = prop_oneof![
        Just(Pick::Cyclic),
        Just(Pick::Uniform),
        (0.0f64..3.0).prop_map(Pick::GradPower),
        Just(Pick::GaussSouthwell),
        Just(Pick::GreedyLS),
    ];
    let update = prop_oneof![Just(Update::CoordLS), Just(Update::VecLS)];
    (pick, update).prop_map(|(p, u)| Method::Coordinate(StrategyConfig::new(p, u)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifted_column_is_scaled_column_plus_diagonal(
        a in (1usize..8).prop_flat_map(symmetric),
        scale in -3.0f64..3.0,
        shift in -100.0f64..100.0,
    ) {
        let n = a.dim();
        let wrapped = ShiftScale::new(a.clone(), scale, shift);
        for j in 0..n {
            let got = dense_column(&wrapped, j);
            let base = dense_column(&a, j);
            for i in 0..n {
                let want = scale * base[i] + if i == j { shift } else { 0.0 };
                prop_assert!(close(got[i], want, 1e-14));
            }
            prop_assert!(close(wrapped.diag(j), scale * a.diag(j) + shift, 1e-14));
        }
    }

    #[test]
    fn coordinate_line_search_is_stationary_and_descending((a, x) in problem(), pick in 0usize..64) {
        let j = pick % a.dim();
        let st = SolverState::new(&a, &x, 0).unwrap();
        let ajj = a.diag(j);
        let alpha = coord_ls_delta(&st, j, ajj);
        let cubic = coord_cubic(&st, j, ajj);
        // h'(α)/4 is the cubic itself; scale by its coefficient magnitude.
        let size = 1.0 + alpha.abs().powi(3) + cubic.b.abs() * alpha * alpha + cubic.c.abs() * alpha.abs() + cubic.d.abs();
        prop_assert!(cubic.eval(alpha).abs() <= 1e-9 * size);
        let mut y = x.clone();
        y[j] += alpha;
        let frob = frobenius_norm_sq(&a);
        prop_assert!(objective(&a, &y, frob) <= objective(&a, &x, frob) + 1e-9 * frob.max(1.0));
    }

    #[test]
    fn monotone_methods_never_increase_the_objective(
        (a, x) in problem(),
        method in coordinate_methods(),
        seed in 0u64..1000,
    ) {
        prop_assume!(method.is_monotone());
        let frob = frobenius_norm_sq(&a);
        let mut st = SolverState::new(&a, &x, seed).unwrap();
        let mut previous = st.objective(frob);
        for _ in 0..50 {
            match method.step(&mut st, &a) {
                Err(Error::Stationary) => break,
                r => { r.unwrap(); }
            }
            let now = st.objective(frob);
            prop_assert!(now <= previous + 1e-9 * frob.max(1.0), "{} rose from {} to {}", method, previous, now);
            previous = now;
        }
    }

    #[test]
    fn maintained_state_matches_recomputation(
        (a, x) in problem(),
        method in coordinate_methods(),
        seed in 0u64..1000,
    ) {
        let mut st = SolverState::new(&a, &x, seed).unwrap();
        for _ in 0..30 {
            if let Method::Coordinate(cfg) = method {
                match step(&mut st, &a, &cfg) {
                    Err(Error::Stationary) => break,
                    r => { r.unwrap(); }
                }
            }
        }
        let z = setup_matvec(&a, st.x());
        let nu: f64 = st.x().iter().map(|v| v * v).sum();
        let s: f64 = st.x().iter().zip(&z).map(|(p, q)| p * q).sum();
        let zmax = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (got, want) in st.z().iter().zip(&z) {
            prop_assert!((got - want).abs() <= 1e-10 * zmax);
        }
        prop_assert!(close(st.nu(), nu, 1e-10));
        prop_assert!(close(st.s(), s, 1e-9));
        let frob = frobenius_norm_sq(&a);
        prop_assert!(close(st.objective(frob), objective(&a, st.x(), frob), 1e-9));
    }

    #[test]
    fn sampler_respects_size_and_support(
        (a, x) in problem(),
        t in 0.0f64..4.0,
        k in 1usize..6,
        with_replacement in any::<bool>(),
        seed in 0u64..1000,
    ) {
        let n = a.dim();
        let mut st = SolverState::new(&a, &x, seed).unwrap();
        let scores = st.gradient_scores();
        let support = if t == 0.0 { n } else { scores.iter().filter(|s| **s != 0.0).count() };
        prop_assume!(support > 0);
        let k = if with_replacement { k } else { k.min(support) };
        let picked = pick_grad_power(&mut st, t, k, with_replacement).unwrap();
        prop_assert_eq!(picked.len(), k);
        for &j in &picked {
            prop_assert!(j < n);
            if t > 0.0 {
                prop_assert!(scores[j] != 0.0, "picked zero-score coordinate {}", j);
            }
        }
        if !with_replacement {
            let mut sorted = picked.clone();
            sorted.sort_unstable();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), k);
        }
    }
}
