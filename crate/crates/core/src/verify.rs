//! Randomised invariant suites. Each returns one [`CheckRow`] per check so
//! callers can print, persist or gate on them.

use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{init_equilibrium, DistributionField};
use crate::complexity::usva_queries;
use crate::dilation::{dilated_run, usva};
use crate::encoding::lbm::{alpha_m, embed_state, restrict_state, LbmEncodings};
use crate::encoding::BlockEncoding;
use crate::error::Result;
use crate::lattice::{d1q3, d2q5, GridSpec, VelocityField, VelocitySet};
use crate::marching::{b_norms_exact, build_m, march, operator_schedule, verify_norm_bound, MarchingState};
use crate::ops::{unitary_completion, verify_unitary, StructuredOperator, C64};
use crate::qlsa::{assemble, singular_bounds, solve_forward};
use crate::report::CheckRow;

pub const OMEGAS: [f64; 4] = [0.3, 0.5, 0.6, 0.75];

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Unitarity, block-extraction and probability tolerance.
    pub tol: f64,
    pub norm_tol: f64,
    pub norm_samples: usize,
    pub contraction_samples: usize,
    pub usva_samples: usize,
    pub qlsa_samples: usize,
    pub qlsa_max_nt: usize,
    pub sigma_slack: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            tol: 1e-10,
            norm_tol: 1e-9,
            norm_samples: 100,
            contraction_samples: 10,
            usva_samples: 20,
            qlsa_samples: 200,
            qlsa_max_nt: 32,
            sigma_slack: 1e-9,
        }
    }
}

fn row(suite: &'static str, check: String, value: f64, bound: f64, pass: bool) -> CheckRow {
    CheckRow {
        suite,
        check,
        value,
        bound,
        pass,
    }
}

fn at_most(suite: &'static str, check: String, value: f64, bound: f64) -> CheckRow {
    row(suite, check, value, bound, value <= bound)
}

/// Per-node velocities with `|u_x|, |u_y| ≤ limit` (`u_y = 0` in 1D).
pub fn random_field(vs: &VelocitySet, grid: &GridSpec, limit: f64, rng: &mut ChaCha8Rng) -> VelocityField {
    let table = (0..grid.nodes())
        .map(|_| {
            let ux = rng.gen_range(-limit..=limit);
            let uy = if vs.d == 2 { rng.gen_range(-limit..=limit) } else { 0.0 };
            [ux, uy]
        })
        .collect();
    VelocityField::PerNode(std::sync::Arc::new(table))
}

/// Equilibrium populations for a random positive concentration.
pub fn random_state(vs: &VelocitySet, grid: &GridSpec, field: &VelocityField, rng: &mut ChaCha8Rng) -> Result<DistributionField> {
    let phi: Vec<f64> = (0..grid.nodes()).map(|_| rng.gen_range(0.1..1.0)).collect();
    init_equilibrium(&phi, field, vs, grid)
}

/// Random complex matrix with spectral norm `scale`.
pub fn random_contraction(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let m = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = m.singular_values().max();
    m * C64::new(scale / norm, 0.0)
}

/// Exact encoding of `a` at normalisation `alpha ≥ ‖a‖` with one ancilla.
pub fn encode_dense(a: &DMatrix<C64>, alpha: f64, label: &str) -> Result<BlockEncoding> {
    let u = unitary_completion(&(a * C64::new(1.0 / alpha, 0.0)))?;
    Ok(BlockEncoding::new(u, alpha, 1, a.nrows(), label)?.with_target(StructuredOperator::dense(a.clone())))
}

fn max_rel(a: &[C64], b: &[C64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Small geometries cycled through by the norm suite.
fn norm_geometry(k: usize) -> Result<(VelocitySet, GridSpec)> {
    Ok(match k % 4 {
        0 => (d1q3(), GridSpec::unit(8, 1)?),
        1 => (d1q3(), GridSpec::unit(16, 1)?),
        2 => (d2q5(), GridSpec::unit(4, 4)?),
        _ => (d2q5(), GridSpec::unit(8, 8)?),
    })
}

/// `‖M_ω‖ ≤ 1` with `τ* = 1/(1−ω)` on random low-Mach fields, plus the
/// exact `‖B‖₁ = 1`, `‖B‖∞ ≤ 1` identities on rational velocities.
pub fn norm_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    for k in 0..cfg.norm_samples {
        let omega = OMEGAS[k % OMEGAS.len()];
        let tau = 1.0 / (1.0 - omega);
        let (vs, grid) = norm_geometry(k / OMEGAS.len())?;
        let field = random_field(&vs, &grid, 1.0 / 3.0, &mut rng);
        let ops = build_m(&field, tau, omega, &vs, &grid, 0)?;
        let rep = verify_norm_bound(&ops, cfg.norm_tol)?;
        rows.push(row(
            "norm",
            format!("spectral_norm[{k}] {} {}x{} omega={omega}", vs.name, grid.nx, grid.ny),
            rep.norm,
            1.0 + cfg.norm_tol,
            rep.bound_holds,
        ));
    }
    for k in 0..cfg.norm_samples.div_ceil(4) {
        let (vs, grid) = norm_geometry(k)?;
        let velocities: Vec<[Ratio<i64>; 2]> = (0..grid.nodes())
            .map(|_| {
                let mut draw = || Ratio::new(rng.gen_range(-10i64..=10), 30);
                let ux = draw();
                let uy = if vs.d == 2 { draw() } else { Ratio::from_integer(0) };
                [ux, uy]
            })
            .collect();
        let (one, inf) = b_norms_exact(&vs, &velocities);
        let label = format!("{} {}x{}", vs.name, grid.nx, grid.ny);
        rows.push(row("norm", format!("b_one_norm_exact[{k}] {label}"), ratio_f64(one), 1.0, one == Ratio::from_integer(1)));
        rows.push(row("norm", format!("b_inf_norm_exact[{k}] {label}"), ratio_f64(inf), 1.0, inf <= Ratio::from_integer(1)));
    }
    Ok(rows)
}

/// The instances checked by [`be_suite`]: 1D with `n = 1, 2, 3` and 2D with `n_x = n_y = 1`.
pub fn be_instances() -> Result<Vec<(VelocitySet, GridSpec)>> {
    Ok(vec![
        (d1q3(), GridSpec::unit(2, 1)?),
        (d1q3(), GridSpec::unit(4, 1)?),
        (d1q3(), GridSpec::unit(8, 1)?),
        (d2q5(), GridSpec::unit(2, 2)?),
    ])
}

/// Unitarity, block extraction, `α` and ancilla counts of the whole tower.
pub fn be_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xbe);
    let mut rows = Vec::new();
    let (tau, omega) = (2.0, 0.5);
    for (vs, grid) in be_instances()? {
        let field = random_field(&vs, &grid, 1.0 / 3.0, &mut rng);
        let encs = LbmEncodings::build(&field, 0, tau, omega, &vs, &grid)?;
        let tag = format!("{} {}x{}", vs.name, grid.nx, grid.ny);
        for be in encs.all() {
            let chk = be.check()?;
            rows.push(at_most("be", format!("{} unitarity {tag}", be.label), chk.unitarity_defect, cfg.tol));
            rows.push(at_most("be", format!("{} block_error {tag}", be.label), chk.block_error, be.epsilon + cfg.tol));
            if let Some((alpha, m)) = be.claimed_bound {
                let pass = (be.alpha - alpha).abs() <= 1e-12 * alpha;
                rows.push(row("be", format!("{} alpha {tag}", be.label), be.alpha, alpha, pass));
                rows.push(at_most("be", format!("{} ancillas {tag}", be.label), be.ancillas as f64, m as f64));
            }
        }
    }
    let (vs, grid) = (d1q3(), GridSpec::unit(2, 1)?);
    for omega in OMEGAS {
        let tau = 1.0 / (1.0 - omega);
        let encs = LbmEncodings::build(&VelocityField::zero(), 0, tau, omega, &vs, &grid)?;
        let expected = 18.0 * std::f64::consts::SQRT_2 * omega.max(1.0 - omega) / omega.min(1.0 - omega);
        let got = encs.m_omega.alpha;
        rows.push(row(
            "be",
            format!("M_ω alpha formula omega={omega}"),
            got,
            expected,
            (got - expected).abs() <= 1e-12 * expected && (alpha_m(omega) - expected).abs() <= 1e-12 * expected,
        ));
    }
    Ok(rows)
}

/// `(N, N_t)` pairs small enough for the full dilated state vector.
pub const DILATION_LBM: [(usize, usize); 3] = [(2, 5), (4, 4), (8, 3)];

/// Success probability and trajectory checks for the dilated circuit on
/// LBM steps and on random contraction sequences.
pub fn dilation_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd1);
    let mut rows = Vec::new();
    let (tau, omega) = (2.0, 0.5);
    let vs = d1q3();
    for (n, n_t) in DILATION_LBM {
        let grid = GridSpec::unit(n, 1)?;
        let field = random_field(&vs, &grid, 1.0 / 3.0, &mut rng);
        let start = MarchingState::pack(&random_state(&vs, &grid, &field, &mut rng)?, omega)?;
        let schedule = operator_schedule(&field, tau, omega, &vs, &grid, n_t)?;
        let reference = march(&start, &schedule)?.pop().expect("non-empty").psi;
        let encs = LbmEncodings::build(&field, 0, tau, omega, &vs, &grid)?;
        let steps = vec![encs.m_omega.clone(); n_t];
        let run = dilated_run(&embed_state(&start.psi, vs.q(), n), &steps)?;
        let tag = format!("lbm N={n} N_t={n_t}");
        rows.push(at_most(
            "dilation",
            format!("success_prob {tag}"),
            (run.success_prob - run.predicted_prob).abs(),
            cfg.tol,
        ));
        let estimate = restrict_state(&run.estimate, vs.q(), n);
        rows.push(at_most("dilation", format!("trajectory_end {tag}"), max_rel(&estimate, &reference), 1e-9));
    }
    for k in 0..cfg.contraction_samples {
        let d = 1 << rng.gen_range(1..=3);
        let n_t = rng.gen_range(1..=6);
        let steps = (0..n_t)
            .map(|j| {
                let a = random_contraction(d, rng.gen_range(0.5..=1.0), &mut rng);
                encode_dense(&a, rng.gen_range(1.0..3.0), &format!("B{j}"))
            })
            .collect::<Result<Vec<_>>>()?;
        let psi0: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let run = dilated_run(&psi0, &steps)?;
        let tag = format!("random[{k}] dim={d} N_t={n_t}");
        rows.push(at_most(
            "dilation",
            format!("success_prob {tag}"),
            (run.success_prob - run.predicted_prob).abs(),
            cfg.tol,
        ));
        rows.push(at_most("dilation", format!("trajectory_end {tag}"), max_rel(&run.estimate, &run.exact), 1e-9));
    }
    Ok(rows)
}

/// Singular value amplification on random encodings.
pub fn usva_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x05);
    let mut rows = Vec::new();
    let epsilon = 1e-3;
    for k in 0..cfg.usva_samples {
        let d = rng.gen_range(2..=32);
        let norm = rng.gen_range(0.2..1.0);
        let a = random_contraction(d, norm, &mut rng);
        let alpha = norm * rng.gen_range(1.0..3.0);
        let s = norm * rng.gen_range(1.0..2.0);
        let delta = rng.gen_range(0.05..0.5);
        let be = encode_dense(&a, alpha, "A")?;
        let res = usva(&be, s, delta, epsilon)?;
        let tag = format!("[{k}] dim={d}");
        let block = res.encoding.extract_dense()? * C64::new(1.0 / res.encoding.alpha, 0.0);
        let expected = &a * C64::new((1.0 - delta) / s, 0.0);
        let err = (block - expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
        rows.push(at_most("usva", format!("block {tag}"), err, cfg.tol));
        let unit = verify_unitary(&res.encoding.unitary, cfg.tol);
        rows.push(at_most("usva", format!("unitarity {tag}"), unit.defect, cfg.tol));
        let formula = alpha / (delta * s) * (alpha / (s * epsilon)).ln();
        let q = usva_queries(alpha, s, delta, epsilon);
        rows.push(at_most("usva", format!("queries {tag}"), (res.queries - formula).abs().max((q - formula).abs()), 1e-9 * formula));
    }
    Ok(rows)
}

/// Conditioning of random global systems with contraction blocks and of
/// the hand-computable `N_t = 1` scalar system.
pub fn qlsa_suite(cfg: &SuiteConfig) -> Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x95);
    let mut rows = Vec::new();
    for k in 0..cfg.qlsa_samples {
        let n_t = rng.gen_range(1..=cfg.qlsa_max_nt);
        let d = 1 << rng.gen_range(0..=2);
        let pad = rng.gen_bool(0.5);
        let steps: Vec<StructuredOperator> = (0..n_t)
            .map(|_| StructuredOperator::dense(random_contraction(d, rng.gen_range(0.5..=1.0), &mut rng)))
            .collect();
        let psi0: Vec<C64> = (0..d).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let sys = assemble(&steps, &psi0, pad)?;
        rows.extend(bound_rows(&format!("random[{k}] N_t={n_t} dim={d} padded={pad}"), &sys, cfg.sigma_slack)?);
    }
    let one = StructuredOperator::identity(1);
    let sys = assemble(&[one], &[C64::new(1.0, 0.0)], false)?;
    let rep = singular_bounds(&sys, cfg.sigma_slack)?;
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    rows.push(at_most("qlsa", "hand N_t=1 sigma_max".into(), (rep.sigma_max - golden).abs(), 1e-12));
    rows.push(at_most("qlsa", "hand N_t=1 sigma_min".into(), (rep.sigma_min - (golden - 1.0)).abs(), 1e-12));
    Ok(rows)
}

fn bound_rows(tag: &str, sys: &crate::qlsa::GlobalSystem, slack: f64) -> Result<Vec<CheckRow>> {
    let rep = singular_bounds(sys, slack)?;
    Ok(vec![
        row("qlsa", format!("sigma_max {tag}"), rep.sigma_max, rep.bound_max + slack, rep.max_ok),
        row("qlsa", format!("sigma_min {tag}"), rep.sigma_min, rep.bound_min - slack, rep.min_ok),
    ])
}

/// Bounds and solver equivalence for global systems built from `M_ω`.
pub fn lbm_qlsa_suite(cfg: &SuiteConfig, instances: &[(VelocitySet, GridSpec, f64, usize)]) -> Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for (vs, grid, tau, n_t) in instances {
        let omega = crate::marching::coupled_omega(*tau);
        let field = VelocityField::Uniform(if vs.d == 1 { [0.2, 0.0] } else { [0.2, 0.2] });
        let phi: Vec<f64> = (0..grid.nodes()).map(|j| 0.3 + 0.1 * ((j * 7 % 11) as f64 / 11.0)).collect();
        let start = MarchingState::pack(&init_equilibrium(&phi, &field, vs, grid)?, omega)?;
        let schedule = operator_schedule(&field, *tau, omega, vs, grid, *n_t)?;
        let traj = march(&start, &schedule)?;
        let steps: Vec<_> = schedule.iter().map(|s| s.m_omega.clone()).collect();
        let sys = assemble(&steps, &start.psi, true)?;
        let tag = format!("lbm {} {}x{} tau={tau} N_t={n_t}", vs.name, grid.nx, grid.ny);
        if sys.dim() <= 8192 {
            rows.extend(bound_rows(&tag, &sys, cfg.sigma_slack)?);
        }
        let (blocks, _) = solve_forward(&sys)?;
        let dev = traj.iter().zip(&blocks).map(|(s, b)| max_rel(b, &s.psi)).fold(0.0, f64::max);
        rows.push(at_most("qlsa", format!("solve_vs_march {tag}"), dev, 1e-11));
        let copies = blocks[*n_t..].iter().all(|b| b == &blocks[*n_t]);
        rows.push(row("qlsa", format!("padded_copies {tag}"), (blocks.len() - n_t - 1) as f64, *n_t as f64, copies && blocks.len() == 2 * n_t + 1));
    }
    Ok(rows)
}

/// Reduced-grid LBM systems used by the `qlsa` suite.
pub fn default_lbm_instances() -> Result<Vec<(VelocitySet, GridSpec, f64, usize)>> {
    let mut out = Vec::new();
    for tau in [0.8, 1.0, 1.3] {
        out.push((d1q3(), GridSpec::unit(8, 1)?, tau, 10));
        out.push((d2q5(), GridSpec::unit(4, 4)?, tau, 6));
    }
    Ok(out)
}
