//! Compact time-marching form of the BGK scheme.
//!
//! With `A = [(1 − 1/τ*) I_{QN} | (1/τ*) B]`, `B = [A₀; …; A_{Q−1}]`,
//! `P = diag(P₀, …, P_{Q−1})` and `E_I = [I … I]`, one step is
//! `[f; φ] ← M [f; φ]` where `M = [PA; E_I PA]`. The weighted state
//! `ψ = [ωf; (1−ω)φ]` evolves by `M_ω = D_ω M D_ω⁻¹`.

use num_rational::Ratio;

use crate::classical::DistributionField;
use crate::error::{invalid, Error, Result};
use crate::lattice::{check_low_mach, GridSpec, LowMachReport, VelocityField, VelocitySet};
use crate::ops::{spectral_norm, NormMethod, StructuredOperator, C64};

#[derive(Clone, Debug)]
pub struct MarchingState {
    pub psi: Vec<C64>,
    pub omega: f64,
    pub q: usize,
    pub nodes: usize,
    pub step: usize,
}

impl MarchingState {
    pub fn pack(field: &DistributionField, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        let n = field.grid.nodes();
        let mut psi: Vec<C64> = field.f.iter().map(|&x| C64::new(omega * x, 0.0)).collect();
        psi.extend(field.phi().into_iter().map(|p| C64::new((1.0 - omega) * p, 0.0)));
        Ok(MarchingState {
            psi,
            omega,
            q: field.vs.q(),
            nodes: n,
            step: field.step,
        })
    }

    /// Unweighted populations (direction-major) and concentration.
    pub fn unpack(&self) -> (Vec<f64>, Vec<f64>) {
        let split = self.q * self.nodes;
        let f = self.psi[..split].iter().map(|z| z.re / self.omega).collect();
        let phi = self.psi[split..].iter().map(|z| z.re / (1.0 - self.omega)).collect();
        (f, phi)
    }

    pub fn phi(&self) -> Vec<f64> {
        self.unpack().1
    }

    pub fn block_dim(&self) -> usize {
        (self.q + 1) * self.nodes
    }
}

pub(crate) fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < 1.0 {
        Ok(())
    } else {
        Err(invalid("omega", format!("{omega} is outside (0, 1)")))
    }
}

/// `ω = 1 − 1/τ*` when that lies in (0, 1), else 1/2.
pub fn coupled_omega(tau_star: f64) -> f64 {
    if tau_star > 1.0 {
        1.0 - 1.0 / tau_star
    } else {
        0.5
    }
}

/// `Aᵢ = wᵢ diag(1 + cᵢ·u_j / c_s²)`.
pub fn build_ai(
    field: &VelocityField,
    step: usize,
    vs: &VelocitySet,
    grid: &GridSpec,
    i: usize,
) -> Result<StructuredOperator> {
    if i >= vs.q() {
        return Err(invalid("direction", format!("{i} >= Q = {}", vs.q())));
    }
    let entries: Vec<f64> = (0..grid.nodes())
        .map(|j| vs.w[i] * (1.0 + vs.projection(i, field.at(j, step))))
        .collect();
    Ok(StructuredOperator::real_diagonal(&entries))
}

#[derive(Clone, Debug)]
pub struct MarchingOperatorSet {
    pub a_i: Vec<StructuredOperator>,
    /// Stacked `[A₀; …; A_{Q−1}]`, `QN × N`.
    pub b: StructuredOperator,
    pub a: StructuredOperator,
    pub p: StructuredOperator,
    pub e_i: StructuredOperator,
    pub m: StructuredOperator,
    pub m_omega: StructuredOperator,
    pub tau_star: f64,
    pub omega: f64,
    pub step: usize,
    pub vs: VelocitySet,
    pub grid: GridSpec,
    velocities: Vec<[f64; 2]>,
}

pub fn build_m(
    field: &VelocityField,
    tau_star: f64,
    omega: f64,
    vs: &VelocitySet,
    grid: &GridSpec,
    step: usize,
) -> Result<MarchingOperatorSet> {
    if !(tau_star > 0.0) {
        return Err(invalid("tau_star", format!("{tau_star} must be positive")));
    }
    check_omega(omega)?;
    let q = vs.q();
    let n = grid.nodes();
    let a_i = (0..q)
        .map(|i| build_ai(field, step, vs, grid, i))
        .collect::<Result<Vec<_>>>()?;
    let ones_col = StructuredOperator::real_dense(q, 1, &vec![1.0; q]);
    let b = StructuredOperator::product(vec![
        StructuredOperator::direct_sum(a_i.clone())?,
        StructuredOperator::tensor(ones_col, StructuredOperator::identity(n)),
    ])?;
    let keep = StructuredOperator::embedding(StructuredOperator::identity(q * n), q * n, (q + 1) * n, 0, 0)?;
    let relax = StructuredOperator::embedding(b.clone(), q * n, (q + 1) * n, 0, q * n)?;
    let a = StructuredOperator::real_sum(vec![(1.0 - 1.0 / tau_star, keep), (1.0 / tau_star, relax)])?;
    let p = StructuredOperator::direct_sum(
        (0..q)
            .map(|i| crate::lattice::streaming_permutation(vs, grid, i))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let e_i = StructuredOperator::tensor(
        StructuredOperator::real_dense(1, q, &vec![1.0; q]),
        StructuredOperator::identity(n),
    );
    // [I_Q; 1ᵀ] ⊗ I_N stacks PA over E_I·PA
    let mut stack = vec![0.0; (q + 1) * q];
    for i in 0..q {
        stack[i * q + i] = 1.0;
        stack[q * q + i] = 1.0;
    }
    let lift = StructuredOperator::tensor(
        StructuredOperator::real_dense(q + 1, q, &stack),
        StructuredOperator::identity(n),
    );
    let m = StructuredOperator::product(vec![lift.clone(), p.clone(), a.clone()])?;
    let weights = |w_f: f64, w_phi: f64| {
        let mut d = vec![w_f; q * n];
        d.extend(std::iter::repeat(w_phi).take(n));
        StructuredOperator::real_diagonal(&d)
    };
    let m_omega = StructuredOperator::product(vec![
        weights(omega, 1.0 - omega),
        lift,
        p.clone(),
        a.clone(),
        weights(1.0 / omega, 1.0 / (1.0 - omega)),
    ])?;
    Ok(MarchingOperatorSet {
        a_i,
        b,
        a,
        p,
        e_i,
        m,
        m_omega,
        tau_star,
        omega,
        step,
        vs: vs.clone(),
        grid: *grid,
        velocities: (0..n).map(|j| field.at(j, step)).collect(),
    })
}

impl MarchingOperatorSet {
    pub fn block_dim(&self) -> usize {
        (self.vs.q() + 1) * self.grid.nodes()
    }

    /// The velocity field frozen at this set's step.
    pub fn velocity_field(&self) -> VelocityField {
        VelocityField::PerNode(std::sync::Arc::new(self.velocities.clone()))
    }

    /// Column-sum and row-sum norms of the stacked `B`.
    pub fn b_norms(&self) -> (f64, f64) {
        let q = self.vs.q();
        let mut one: f64 = 0.0;
        let mut inf: f64 = 0.0;
        for u in &self.velocities {
            let mut col = 0.0;
            for i in 0..q {
                let entry = (self.vs.w[i] * (1.0 + self.vs.projection(i, *u))).abs();
                col += entry;
                inf = inf.max(entry);
            }
            one = one.max(col);
        }
        (one, inf)
    }
}

/// `ψ ← M_ω ψ`.
pub fn step(state: &MarchingState, ops: &MarchingOperatorSet) -> Result<MarchingState> {
    if state.psi.len() != ops.block_dim() {
        return Err(Error::DimensionMismatch {
            context: "marching step",
            expected: ops.block_dim(),
            got: state.psi.len(),
        });
    }
    if (state.omega - ops.omega).abs() > 0.0 {
        return Err(invalid("omega", "state and operator weights differ"));
    }
    Ok(MarchingState {
        psi: ops.m_omega.apply(&state.psi)?,
        step: state.step + 1,
        ..state.clone()
    })
}

/// Builds the per-step operator sets for `steps` steps, sharing one set
/// when the velocity field is time independent.
pub fn operator_schedule(
    field: &VelocityField,
    tau_star: f64,
    omega: f64,
    vs: &VelocitySet,
    grid: &GridSpec,
    steps: usize,
) -> Result<Vec<MarchingOperatorSet>> {
    if !field.is_time_dependent() {
        let ops = build_m(field, tau_star, omega, vs, grid, 0)?;
        return Ok(vec![ops; steps]);
    }
    (0..steps).map(|t| build_m(field, tau_star, omega, vs, grid, t)).collect()
}

/// Every state from `initial` through `steps` applications of `M_ω`.
pub fn march(initial: &MarchingState, schedule: &[MarchingOperatorSet]) -> Result<Vec<MarchingState>> {
    let mut out = Vec::with_capacity(schedule.len() + 1);
    out.push(initial.clone());
    for ops in schedule {
        let next = step(out.last().expect("non-empty"), ops)?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct NormBoundReport {
    pub norm: f64,
    pub method: NormMethod,
    pub bound_holds: bool,
    pub low_mach: LowMachReport,
    /// `τ* = 1/(1−ω)` and `τ* > 1`.
    pub coupled: bool,
    pub applicable: bool,
    pub b_one_norm: f64,
    pub b_inf_norm: f64,
}

pub fn verify_norm_bound(ops: &MarchingOperatorSet, tol: f64) -> Result<NormBoundReport> {
    let report = spectral_norm(&ops.m_omega, tol.min(1e-8).max(1e-14))?;
    let low_mach = check_low_mach(&ops.velocity_field());
    let coupled = ops.tau_star > 1.0 && (ops.tau_star * (1.0 - ops.omega) - 1.0).abs() < 1e-12;
    let (b_one_norm, b_inf_norm) = ops.b_norms();
    Ok(NormBoundReport {
        norm: report.spectral_norm_estimate,
        method: report.method,
        bound_holds: report.spectral_norm_estimate <= 1.0 + tol,
        low_mach,
        coupled,
        applicable: coupled && low_mach.holds,
        b_one_norm,
        b_inf_norm,
    })
}

/// Exact `(‖B‖₁, ‖B‖∞)` for rational velocities (lattice units).
pub fn b_norms_exact(vs: &VelocitySet, velocities: &[[Ratio<i64>; 2]]) -> (Ratio<i64>, Ratio<i64>) {
    let zero = Ratio::from_integer(0);
    let mut one = zero;
    let mut inf = zero;
    for u in velocities {
        let mut col = zero;
        for (w, e) in vs.w_exact.iter().zip(&vs.e) {
            let proj = u[0] * e[0] as i64 + u[1] * e[1] as i64;
            let mut entry = *w * (Ratio::from_integer(1) + proj * 3);
            if entry < zero {
                entry = -entry;
            }
            col += entry;
            if entry > inf {
                inf = entry;
            }
        }
        if col > one {
            one = col;
        }
    }
    (one, inf)
}
