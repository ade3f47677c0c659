//! Gaussian hill benchmarks.
//!
//! Lengths are in units of `Δx`, times in steps and velocities in
//! `Δx/Δt`. The numerical concentration comes from one of four paths and
//! is compared with the classical solver and with the closed-form
//! solution on the periodic domain (nearest image).

use std::fmt;
use std::str::FromStr;

use crate::classical::{init_equilibrium, run};
use crate::dilation::compressed_run;
use crate::encoding::lbm::alpha_m;
use crate::error::{invalid, Error, Result};
use crate::lattice::{GridSpec, VelocityField, VelocitySet};
use crate::marching::{march, operator_schedule, MarchingState};
use crate::ops::C64;
use crate::qlsa::{assemble, solve_forward};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    Classical,
    Marching,
    Dilated,
    Qlsa,
}

impl Path {
    pub const ALL: [Path; 4] = [Path::Classical, Path::Marching, Path::Dilated, Path::Qlsa];

    pub fn as_str(&self) -> &'static str {
        match self {
            Path::Classical => "classical",
            Path::Marching => "marching",
            Path::Dilated => "dilated",
            Path::Qlsa => "qlsa",
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Path {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Path::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| invalid("path", format!("`{s}` is not one of classical, marching, dilated, qlsa")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyticMode {
    /// Amplitude `σ₀²/(σ₀²+σ_D²)` in every dimension.
    Nominal,
    /// Amplitude `(σ₀²/(σ₀²+σ_D²))^{d/2}`.
    Corrected,
}

#[derive(Clone, Debug)]
pub struct GaussCase {
    pub id: String,
    pub vs: VelocitySet,
    pub grid: GridSpec,
    pub phi0: f64,
    pub sigma0: f64,
    pub x0: [f64; 2],
    pub u: [f64; 2],
    /// Replaces the uniform `u` when set. The closed form then no longer
    /// applies and the analytic columns are NaN.
    pub velocity_table: Option<VelocityField>,
    pub tau_star: f64,
    pub omega: f64,
    pub steps: Vec<usize>,
    pub path: Path,
}

impl GaussCase {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma0 > 0.0) {
            return Err(invalid("sigma0", "must be positive"));
        }
        if !(self.tau_star > 0.5) {
            return Err(invalid("tau_star", "must exceed 1/2"));
        }
        crate::marching::check_omega(self.omega)?;
        if let Some(t) = &self.velocity_table {
            t.validate(&self.grid)?;
        }
        if self.vs.d == 1 && self.grid.ny != 1 {
            return Err(invalid("ny", "one-dimensional models need ny = 1"));
        }
        if self.vs.d == 1 && self.u[1] != 0.0 {
            return Err(invalid("uy", "one-dimensional models have no y velocity"));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.vs.d
    }

    /// `D` in lattice units.
    pub fn diffusion(&self) -> f64 {
        (self.tau_star - 0.5) / 3.0
    }

    pub fn field(&self) -> VelocityField {
        self.velocity_table.clone().unwrap_or(VelocityField::Uniform(self.u))
    }
}

/// Signed displacement `x − c` reduced to the nearest periodic image.
fn nearest(x: f64, c: f64, len: f64) -> f64 {
    let d = (x - c).rem_euclid(len);
    if d >= len / 2.0 {
        d - len
    } else {
        d
    }
}

fn squared_distance(case: &GaussCase, j: usize, center: [f64; 2]) -> f64 {
    let (ix, iy) = case.grid.coords(j);
    let dx = nearest(ix as f64, center[0], case.grid.nx as f64);
    if case.dimension() == 1 {
        dx * dx
    } else {
        let dy = nearest(iy as f64, center[1], case.grid.ny as f64);
        dx * dx + dy * dy
    }
}

pub fn gauss_init(case: &GaussCase) -> Vec<f64> {
    (0..case.grid.nodes())
        .map(|j| case.phi0 * (-squared_distance(case, j, case.x0) / (2.0 * case.sigma0 * case.sigma0)).exp())
        .collect()
}

/// Closed-form concentration after `t` steps.
pub fn gauss_analytic(case: &GaussCase, t: f64, mode: AnalyticMode) -> Vec<f64> {
    let s0 = case.sigma0 * case.sigma0;
    let var = s0 + 2.0 * case.diffusion() * t;
    let ratio = s0 / var;
    let amp = match mode {
        AnalyticMode::Nominal => ratio,
        AnalyticMode::Corrected => ratio.powf(case.dimension() as f64 / 2.0),
    };
    let center = [case.x0[0] + case.u[0] * t, case.x0[1] + case.u[1] * t];
    (0..case.grid.nodes())
        .map(|j| amp * case.phi0 * (-squared_distance(case, j, center) / (2.0 * var)).exp())
        .collect()
}

/// `‖a − b‖₂ / ‖b‖₂` and `‖a − b‖_∞ / ‖b‖_∞`.
pub fn relative_errors(a: &[f64], b: &[f64]) -> (f64, f64) {
    let diff2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let ref2: f64 = b.iter().map(|y| y * y).sum();
    let dinf = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let rinf = b.iter().map(|y| y.abs()).fold(0.0, f64::max);
    (diff2.sqrt() / ref2.sqrt(), dinf / rinf)
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub step: usize,
    pub phi_numeric: Vec<f64>,
    pub phi_classical: Vec<f64>,
    pub phi_nominal: Vec<f64>,
    pub phi_corrected: Vec<f64>,
    pub rel_l2_nominal: f64,
    pub rel_l2_corrected: f64,
    pub rel_linf_nominal: f64,
    pub rel_linf_corrected: f64,
    pub mass_drift: f64,
    pub path_vs_classical_max: f64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub case: GaussCase,
    pub results: Vec<StepResult>,
    /// Counter-0 success probability at each evaluated step, dilated path only.
    pub success_probs: Option<Vec<f64>>,
    pub qlsa_residual: Option<f64>,
}

fn marching_phi(states: &[Vec<C64>], omega: f64, q: usize, n: usize) -> Vec<Vec<f64>> {
    states
        .iter()
        .map(|psi| psi[q * n..].iter().map(|z| z.re / (1.0 - omega)).collect())
        .collect()
}

pub fn run_case(case: &GaussCase) -> Result<BenchReport> {
    case.validate()?;
    let horizon = case.steps.iter().copied().max().unwrap_or(0);
    let field = case.field();
    let phi0 = gauss_init(case);
    let initial = init_equilibrium(&phi0, &field, &case.vs, &case.grid)?;
    let classical = run(&initial, &field, case.tau_star, horizon)?.phi;
    let (q, n) = (case.vs.q(), case.grid.nodes());

    let mut success_probs = None;
    let mut qlsa_residual = None;
    let numeric: Vec<Vec<f64>> = match case.path {
        Path::Classical => classical.clone(),
        Path::Marching | Path::Dilated | Path::Qlsa if horizon == 0 => vec![phi0.clone()],
        Path::Marching => {
            let start = MarchingState::pack(&initial, case.omega)?;
            let schedule = operator_schedule(&field, case.tau_star, case.omega, &case.vs, &case.grid, horizon)?;
            march(&start, &schedule)?.into_iter().map(|s| s.phi()).collect()
        }
        Path::Dilated => {
            let start = MarchingState::pack(&initial, case.omega)?;
            let schedule = operator_schedule(&field, case.tau_star, case.omega, &case.vs, &case.grid, horizon)?;
            let ops: Vec<_> = schedule.iter().map(|s| s.m_omega.clone()).collect();
            let r = compressed_run(&start.psi, &ops, &vec![alpha_m(case.omega); horizon])?;
            let mut states = vec![start.psi.clone()];
            states.extend(r.estimates);
            success_probs = Some(case.steps.iter().map(|&k| if k == 0 { 1.0 } else { r.success_probs[k - 1] }).collect());
            marching_phi(&states, case.omega, q, n)
        }
        Path::Qlsa => {
            let start = MarchingState::pack(&initial, case.omega)?;
            let schedule = operator_schedule(&field, case.tau_star, case.omega, &case.vs, &case.grid, horizon)?;
            let steps: Vec<_> = schedule.iter().map(|s| s.m_omega.clone()).collect();
            let sys = assemble(&steps, &start.psi, true)?;
            let (blocks, residual) = solve_forward(&sys)?;
            qlsa_residual = Some(residual);
            marching_phi(&blocks[..=horizon], case.omega, q, n)
        }
    };

    let mass0: f64 = phi0.iter().sum();
    let mut results = Vec::with_capacity(case.steps.len());
    for &k in &case.steps {
        let num = numeric[k].clone();
        let cls = classical[k].clone();
        let (nominal, corrected) = if case.velocity_table.is_some() {
            (vec![f64::NAN; n], vec![f64::NAN; n])
        } else {
            (
                gauss_analytic(case, k as f64, AnalyticMode::Nominal),
                gauss_analytic(case, k as f64, AnalyticMode::Corrected),
            )
        };
        let (l2p, linfp) = relative_errors(&num, &nominal);
        let (l2c, linfc) = relative_errors(&num, &corrected);
        let mass: f64 = num.iter().sum();
        let dev = num.iter().zip(&cls).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        results.push(StepResult {
            step: k,
            phi_numeric: num,
            phi_classical: cls,
            phi_nominal: nominal,
            phi_corrected: corrected,
            rel_l2_nominal: l2p,
            rel_l2_corrected: l2c,
            rel_linf_nominal: linfp,
            rel_linf_corrected: linfc,
            mass_drift: (mass - mass0).abs() / mass0,
            path_vs_classical_max: dev,
        });
    }
    Ok(BenchReport {
        case: case.clone(),
        results,
        success_probs,
        qlsa_residual,
    })
}

/// The one-dimensional benchmark on 128 nodes.
pub fn case_1d(tau_star: f64, steps: Vec<usize>, path: Path) -> Result<GaussCase> {
    Ok(GaussCase {
        id: format!("gauss1d_tau{tau_star}"),
        vs: crate::lattice::d1q3(),
        grid: GridSpec::unit(128, 1)?,
        phi0: 0.3,
        sigma0: 15.0,
        x0: [64.0, 0.0],
        u: [0.2, 0.0],
        velocity_table: None,
        tau_star,
        omega: crate::marching::coupled_omega(tau_star),
        steps,
        path,
    })
}

/// The two-dimensional benchmark on 64 × 64 nodes.
pub fn case_2d(tau_star: f64, steps: Vec<usize>, path: Path) -> Result<GaussCase> {
    Ok(GaussCase {
        id: format!("gauss2d_tau{tau_star}"),
        vs: crate::lattice::d2q5(),
        grid: GridSpec::unit(64, 64)?,
        phi0: 0.3,
        sigma0: 5.0,
        x0: [32.0, 32.0],
        u: [0.2, 0.2],
        velocity_table: None,
        tau_star,
        omega: crate::marching::coupled_omega(tau_star),
        steps,
        path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_values() {
        let case = case_1d(0.8, vec![0], Path::Classical).unwrap();
        let phi = gauss_init(&case);
        assert!((phi[64] - 0.3).abs() < 1e-16);
        let expected = 0.3 * (-0.5f64).exp();
        assert!((phi[49] - expected).abs() < 1e-15 && (phi[79] - expected).abs() < 1e-15);
        assert!((expected - 0.181_959_198).abs() < 1e-8);
        let mut wide = case.clone();
        wide.sigma0 = 1e12;
        assert!(gauss_init(&wide).iter().all(|&p| (p - 0.3).abs() < 1e-12));
    }

    #[test]
    fn analytic_peak_and_modes() {
        let mut case = case_1d(0.8, vec![0], Path::Classical).unwrap();
        case.u = [0.0, 0.0];
        assert!((case.diffusion() - 0.1).abs() < 1e-15);
        let nominal = gauss_analytic(&case, 40.0, AnalyticMode::Nominal);
        assert!((nominal[64] - 0.3 * 225.0 / 233.0).abs() < 1e-15);
        assert!((nominal[64] - 0.289_70).abs() < 1e-5);
        let at0 = gauss_analytic(&case, 0.0, AnalyticMode::Corrected);
        assert_eq!(at0, gauss_init(&case));
        let c2 = case_2d(1.0, vec![0], Path::Classical).unwrap();
        assert_eq!(
            gauss_analytic(&c2, 7.0, AnalyticMode::Nominal),
            gauss_analytic(&c2, 7.0, AnalyticMode::Corrected)
        );
    }

    #[test]
    fn corrected_mode_solves_the_pde() {
        // ∂φ/∂t + u ∂φ/∂x − D ∂²φ/∂x² by central differences; the grid
        // spacing is simulated by scaling σ₀ and evaluating at fractional points
        let mut case = case_1d(1.0, vec![0], Path::Classical).unwrap();
        case.u = [0.2, 0.0];
        let d = case.diffusion();
        let eval = |x: f64, t: f64| {
            let var = case.sigma0 * case.sigma0 + 2.0 * d * t;
            let amp = (case.sigma0 * case.sigma0 / var).sqrt();
            let c = case.x0[0] + case.u[0] * t;
            amp * case.phi0 * (-(x - c) * (x - c) / (2.0 * var)).exp()
        };
        let mut last = f64::INFINITY;
        for h in [0.4, 0.2, 0.1] {
            let (x, t) = (70.0, 12.0);
            let dt = (eval(x, t + h) - eval(x, t - h)) / (2.0 * h);
            let dx = (eval(x + h, t) - eval(x - h, t)) / (2.0 * h);
            let dxx = (eval(x + h, t) - 2.0 * eval(x, t) + eval(x - h, t)) / (h * h);
            let r = (dt + case.u[0] * dx - d * dxx).abs();
            assert!(r < last / 3.0, "residual {r} did not shrink at second order");
            last = r;
        }
    }

    #[test]
    fn zero_steps_have_no_error() {
        for path in Path::ALL {
            let case = case_1d(1.3, vec![0], path).unwrap();
            let r = run_case(&case).unwrap();
            // equilibrium moments reproduce φ₀ up to rounding
            assert!(r.results[0].rel_l2_corrected < 1e-15);
            assert!(r.results[0].rel_l2_nominal < 1e-15);
        }
    }

    #[test]
    fn paths_agree_on_a_short_run() {
        for path in Path::ALL {
            let case = case_1d(0.8, vec![5, 10], path).unwrap();
            let r = run_case(&case).unwrap();
            for s in &r.results {
                assert!(s.path_vs_classical_max < 1e-12, "{path}: {}", s.path_vs_classical_max);
                assert!(s.mass_drift < 1e-12);
                assert!(s.rel_l2_corrected < 0.05);
            }
        }
    }
}
