use std::sync::Arc;

use proptest::prelude::*;
use qlbm_core::classical::{collide, init_equilibrium, stream, DistributionField};
use qlbm_core::encoding::{be_diagonal, be_product, be_tensor};
use qlbm_core::lattice::{d1q3, d2q5, streaming_permutation, GridSpec, VelocityField};
use qlbm_core::marching::{build_m, coupled_omega, step, MarchingState};
use qlbm_core::ops::{vec, verify_unitary, StructuredOperator};
use qlbm_core::C64;

fn grid_2d() -> impl Strategy<Value = GridSpec> {
    (1u32..=3, 1u32..=3).prop_map(|(a, b)| GridSpec::unit(1 << a, 1 << b).unwrap())
}

fn field_for(grid: GridSpec, two_d: bool) -> impl Strategy<Value = VelocityField> {
    let limit = 1.0 / 3.0;
    prop::collection::vec((-limit..=limit, -limit..=limit), grid.nodes()).prop_map(move |us| {
        VelocityField::PerNode(Arc::new(us.into_iter().map(|(x, y)| [x, if two_d { y } else { 0.0 }]).collect()))
    })
}

fn state(grid: GridSpec, two_d: bool) -> impl Strategy<Value = (VelocityField, Vec<f64>)> {
    (field_for(grid, two_d), prop::collection::vec(0.05f64..2.0, grid.nodes()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pack_unpack_round_trips(
        (grid, (field, phi)) in grid_2d().prop_flat_map(|g| (Just(g), state(g, true))),
        omega in 0.05f64..0.95,
    ) {
        let vs = d2q5();
        let f = init_equilibrium(&phi, &field, &vs, &grid).unwrap();
        let packed = MarchingState::pack(&f, omega).unwrap();
        let (f2, phi2) = packed.unpack();
        for (a, b) in f.f.iter().zip(&f2) {
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
        for (a, b) in phi.iter().zip(&phi2) {
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn one_marching_step_is_one_lbm_step(
        (grid, (field, phi)) in grid_2d().prop_flat_map(|g| (Just(g), state(g, true))),
        tau in prop::sample::select(vec![0.8, 1.0, 1.3, 2.0]),
    ) {
        let vs = d2q5();
        let omega = coupled_omega(tau);
        let f = init_equilibrium(&phi, &field, &vs, &grid).unwrap();
        let ops = build_m(&field, tau, omega, &vs, &grid, 0).unwrap();
        let next = step(&MarchingState::pack(&f, omega).unwrap(), &ops).unwrap();
        let reference: DistributionField = stream(&collide(&f, &field, tau).unwrap());
        let (f2, phi2) = next.unpack();
        for (a, b) in f2.iter().zip(&reference.f) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-3));
        }
        for (a, b) in phi2.iter().zip(&reference.phi()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn lbm_conserves_mass(
        (field, phi) in state(GridSpec::unit(16, 1).unwrap(), false),
        tau in 0.6f64..3.0,
    ) {
        let vs = d1q3();
        let grid = GridSpec::unit(16, 1).unwrap();
        let mut f = init_equilibrium(&phi, &field, &vs, &grid).unwrap();
        let m0 = f.total();
        for _ in 0..10 {
            f = stream(&collide(&f, &field, tau).unwrap());
        }
        prop_assert!((f.total() - m0).abs() <= 1e-12 * m0);
    }

    #[test]
    fn streaming_maps_are_unitary_bijections(grid in grid_2d(), i in 0usize..5) {
        let p = streaming_permutation(&d2q5(), &grid, i).unwrap();
        prop_assert!(verify_unitary(&p, 1e-14).unitary);
        let mut hit = vec![false; grid.nodes()];
        for j in 0..grid.nodes() {
            let out = p.apply(&vec::basis(grid.nodes(), j)).unwrap();
            let k = out.iter().position(|z| z.re == 1.0).unwrap();
            prop_assert!(!hit[k]);
            hit[k] = true;
        }
    }

    #[test]
    fn diagonal_encodings_compose(
        a in prop::collection::vec(-1.0f64..1.0, 4),
        b in prop::collection::vec(-1.0f64..1.0, 4),
        c in prop::collection::vec(-1.0f64..1.0, 2),
    ) {
        let cx = |v: &[f64]| v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
        let ea = be_diagonal(&cx(&a), "a").unwrap();
        let eb = be_diagonal(&cx(&b), "b").unwrap();
        let ec = be_diagonal(&cx(&c), "c").unwrap();
        let prod = be_product(&ea, &eb).unwrap();
        let tens = be_tensor(&prod, &ec).unwrap();
        for be in [&prod, &tens] {
            let chk = be.check().unwrap();
            prop_assert!(chk.passes(1e-12, 0.0), "{}: {:?}", be.label, chk);
        }
        let d = prod.extract_dense().unwrap();
        for k in 0..4 {
            prop_assert!((d[(k, k)].re - a[k] * b[k]).abs() < 1e-12);
        }
        let expected = StructuredOperator::real_diagonal(
            &(0..8).map(|k| a[k / 2] * b[k / 2] * c[k % 2]).collect::<Vec<_>>(),
        );
        let got = tens.extract_dense().unwrap();
        let want = expected.materialize().unwrap();
        prop_assert!((got - want).iter().all(|z| z.norm() < 1e-12));
    }
}
