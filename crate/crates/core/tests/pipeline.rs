//! End-to-end checks through the public API only.

use qlbm_core::dilation::{compressed_run, dilated_run};
use qlbm_core::encoding::lbm::{embed_state, restrict_state, LbmEncodings};
use qlbm_core::gauss::{case_1d, case_2d, run_case, Path};
use qlbm_core::lattice::{d1q3, GridSpec, VelocityField};
use qlbm_core::marching::{march, operator_schedule, MarchingState};
use qlbm_core::ops::vec;
use qlbm_core::qlsa::{assemble, solve_forward};
use qlbm_core::report::{write_bench_summary, write_checks, CheckRow};
use qlbm_core::classical::init_equilibrium;

#[test]
fn every_path_reproduces_the_classical_hill() {
    for path in Path::ALL {
        let rep = run_case(&case_1d(1.3, vec![0, 5, 12], path).unwrap()).unwrap();
        for r in &rep.results {
            assert!(r.path_vs_classical_max < 1e-12, "{path} step {}: {}", r.step, r.path_vs_classical_max);
            assert!(r.mass_drift < 1e-12);
        }
        assert_eq!(rep.success_probs.is_some(), path == Path::Dilated);
        assert_eq!(rep.qlsa_residual.is_some(), path == Path::Qlsa);
    }
}

#[test]
fn pure_diffusion_is_symmetric_about_the_centre() {
    let mut case = case_2d(1.0, vec![15], Path::Marching).unwrap();
    case.u = [0.0, 0.0];
    let rep = run_case(&case).unwrap();
    let phi = &rep.results[0].phi_numeric;
    let g = case.grid;
    for iy in 1..g.ny {
        for ix in 1..g.nx {
            let mirror = g.index(g.nx - ix, g.ny - iy);
            let a = phi[g.index(ix, iy)];
            assert!((a - phi[mirror]).abs() < 1e-14, "({ix}, {iy})");
        }
    }
}

#[test]
fn dilated_circuit_and_compressed_run_agree() {
    let (vs, grid) = (d1q3(), GridSpec::unit(2, 1).unwrap());
    let field = VelocityField::Uniform([0.15, 0.0]);
    let (tau, omega) = (2.0, 0.5);
    let init = init_equilibrium(&[0.7, 1.1], &field, &vs, &grid).unwrap();
    let start = MarchingState::pack(&init, omega).unwrap();
    let encs = LbmEncodings::build(&field, 0, tau, omega, &vs, &grid).unwrap();
    let n_t = 3;
    let full = dilated_run(&embed_state(&start.psi, vs.q(), 2), &vec![encs.m_omega.clone(); n_t]).unwrap();

    let schedule = operator_schedule(&field, tau, omega, &vs, &grid, n_t).unwrap();
    let ops: Vec<_> = schedule.iter().map(|s| s.m_omega.clone()).collect();
    let compressed = compressed_run(&start.psi, &ops, &vec![encs.m_omega.alpha; n_t]).unwrap();

    assert!((full.success_prob - compressed.success_probs[n_t - 1]).abs() < 1e-12);
    let restricted = restrict_state(&full.estimate, vs.q(), 2);
    assert!(vec::max_abs_diff(&restricted, compressed.estimate()) < 1e-10);
}

#[test]
fn padded_solve_tracks_the_trajectory() {
    let case = case_1d(0.8, vec![0], Path::Marching).unwrap();
    let field = case.field();
    let init = init_equilibrium(&qlbm_core::gauss::gauss_init(&case), &field, &case.vs, &case.grid).unwrap();
    let start = MarchingState::pack(&init, case.omega).unwrap();
    let schedule = operator_schedule(&field, case.tau_star, case.omega, &case.vs, &case.grid, 8).unwrap();
    let traj = march(&start, &schedule).unwrap();
    let steps: Vec<_> = schedule.iter().map(|s| s.m_omega.clone()).collect();
    let sys = assemble(&steps, &start.psi, true).unwrap();
    let (blocks, residual) = solve_forward(&sys).unwrap();
    assert!(residual < 1e-14);
    assert_eq!(blocks.len(), 17);
    for (k, s) in traj.iter().enumerate() {
        assert!(vec::max_abs_diff(&blocks[k], &s.psi) < 1e-14);
    }
}

#[test]
fn csv_outputs_parse_back() {
    let rep = run_case(&case_1d(1.0, vec![0, 4], Path::Classical).unwrap()).unwrap();
    let mut buf = Vec::new();
    write_bench_summary(&mut buf, &[rep.clone()]).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let l2: f64 = rows[1][5].parse().unwrap();
    assert_eq!(l2, rep.results[1].rel_l2_corrected);

    let mut buf = Vec::new();
    let check = CheckRow {
        suite: "demo",
        check: "a, b".into(),
        value: 0.5,
        bound: 1.0,
        pass: true,
    };
    write_checks(&mut buf, &[check]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains("\"a, b\""));
}
