//! Reference collide-and-stream BGK solver.

use crate::error::{invalid, Error, Result};
use crate::lattice::{equilibrium, GridSpec, VelocityField, VelocitySet};

/// Populations stored direction-major: `f[i * N + j] = fᵢ(x_j)`.
#[derive(Clone, Debug)]
pub struct DistributionField {
    pub f: Vec<f64>,
    pub grid: GridSpec,
    pub vs: VelocitySet,
    pub step: usize,
}

impl DistributionField {
    pub fn zeros(vs: &VelocitySet, grid: &GridSpec) -> Self {
        DistributionField {
            f: vec![0.0; vs.q() * grid.nodes()],
            grid: *grid,
            vs: vs.clone(),
            step: 0,
        }
    }

    pub fn from_populations(f: Vec<f64>, vs: &VelocitySet, grid: &GridSpec) -> Result<Self> {
        let expected = vs.q() * grid.nodes();
        if f.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "populations",
                expected,
                got: f.len(),
            });
        }
        Ok(DistributionField {
            f,
            grid: *grid,
            vs: vs.clone(),
            step: 0,
        })
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        let n = self.grid.nodes();
        &self.f[i * n..(i + 1) * n]
    }

    /// `φ_j = Σᵢ fᵢ(x_j)`.
    pub fn phi(&self) -> Vec<f64> {
        let n = self.grid.nodes();
        let mut phi = vec![0.0; n];
        for chunk in self.f.chunks(n) {
            for (p, x) in phi.iter_mut().zip(chunk) {
                *p += x;
            }
        }
        phi
    }

    pub fn total(&self) -> f64 {
        self.f.iter().sum()
    }
}

pub fn init_equilibrium(
    phi: &[f64],
    field: &VelocityField,
    vs: &VelocitySet,
    grid: &GridSpec,
) -> Result<DistributionField> {
    let n = grid.nodes();
    if phi.len() != n {
        return Err(Error::DimensionMismatch {
            context: "initial phi",
            expected: n,
            got: phi.len(),
        });
    }
    let mut out = DistributionField::zeros(vs, grid);
    for (j, &p) in phi.iter().enumerate() {
        for (i, fi) in equilibrium(p, field.at(j, 0), vs).into_iter().enumerate() {
            out.f[i * n + j] = fi;
        }
    }
    Ok(out)
}

/// `fᵢ ← (1 − 1/τ*) fᵢ + (1/τ*) fᵢ^eq(φ, u)` with the velocity at `state.step`.
pub fn collide(state: &DistributionField, field: &VelocityField, tau_star: f64) -> Result<DistributionField> {
    if !(tau_star > 0.0) {
        return Err(invalid("tau_star", format!("{tau_star} must be positive")));
    }
    let n = state.grid.nodes();
    let keep = 1.0 - 1.0 / tau_star;
    let relax = 1.0 / tau_star;
    let phi = state.phi();
    let mut out = state.clone();
    for j in 0..n {
        let u = field.at(j, state.step);
        for i in 0..state.vs.q() {
            let feq = state.vs.w[i] * phi[j] * (1.0 + state.vs.projection(i, u));
            out.f[i * n + j] = keep * state.f[i * n + j] + relax * feq;
        }
    }
    Ok(out)
}

/// Moves every population one node along its direction, periodically.
pub fn stream(state: &DistributionField) -> DistributionField {
    let n = state.grid.nodes();
    let mut out = state.clone();
    for i in 0..state.vs.q() {
        let e = state.vs.e[i];
        for j in 0..n {
            out.f[i * n + state.grid.neighbor(j, e)] = state.f[i * n + j];
        }
    }
    out.step = state.step + 1;
    out
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `phi[k]` is the concentration after `k` steps, starting with the input.
    pub phi: Vec<Vec<f64>>,
    pub last: DistributionField,
}

/// Collide then stream, `steps` times.
pub fn run(state: &DistributionField, field: &VelocityField, tau_star: f64, steps: usize) -> Result<Trajectory> {
    let mut cur = state.clone();
    let mut phi = Vec::with_capacity(steps + 1);
    phi.push(cur.phi());
    for _ in 0..steps {
        cur = stream(&collide(&cur, field, tau_star)?);
        phi.push(cur.phi());
    }
    Ok(Trajectory { phi, last: cur })
}

/// `"over-relaxed"` below τ* = 1, `"under-relaxed"` above.
pub fn relaxation_regime(tau_star: f64) -> &'static str {
    if tau_star <= 0.5 {
        "unstable"
    } else if tau_star < 1.0 {
        "over-relaxed"
    } else if tau_star == 1.0 {
        "full-relaxation"
    } else {
        "under-relaxed"
    }
}
