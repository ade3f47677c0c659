//! Fixtures shared by the criterion benches.

use qlbm_core::encoding::lbm::{embed_state, LbmEncodings};
use qlbm_core::gauss::{case_1d, case_2d, gauss_init, GaussCase, Path};
use qlbm_core::lattice::{d1q3, GridSpec, VelocityField};
use qlbm_core::marching::{build_m, MarchingOperatorSet, MarchingState};
use qlbm_core::qlsa::{assemble, GlobalSystem};
use qlbm_core::{classical, Result, C64};

/// A benchmark case with its packed initial state and step operators.
pub struct MarchingFixture {
    pub case: GaussCase,
    pub ops: MarchingOperatorSet,
    pub state: MarchingState,
}

impl MarchingFixture {
    fn from_case(case: GaussCase) -> Result<Self> {
        let field = case.field();
        let init = classical::init_equilibrium(&gauss_init(&case), &field, &case.vs, &case.grid)?;
        let ops = build_m(&field, case.tau_star, case.omega, &case.vs, &case.grid, 0)?;
        let state = MarchingState::pack(&init, case.omega)?;
        Ok(MarchingFixture { case, ops, state })
    }

    /// 128-node one-dimensional hill.
    pub fn hill_1d(tau_star: f64) -> Result<Self> {
        Self::from_case(case_1d(tau_star, vec![0], Path::Marching)?)
    }

    /// 64 × 64 two-dimensional hill.
    pub fn hill_2d(tau_star: f64) -> Result<Self> {
        Self::from_case(case_2d(tau_star, vec![0], Path::Marching)?)
    }

    pub fn initial_field(&self) -> Result<classical::DistributionField> {
        let field = self.case.field();
        classical::init_equilibrium(&gauss_init(&self.case), &field, &self.case.vs, &self.case.grid)
    }
}

/// `M_ω` encoding on a small 1D grid with an embedded input vector.
pub fn momega_fixture(nodes: usize) -> Result<(LbmEncodings, Vec<C64>)> {
    let vs = d1q3();
    let grid = GridSpec::unit(nodes, 1)?;
    let field = VelocityField::Uniform([0.1, 0.0]);
    let encs = LbmEncodings::build(&field, 0, 2.0, 0.5, &vs, &grid)?;
    let phi: Vec<f64> = (0..nodes).map(|j| 1.0 + j as f64 / nodes as f64).collect();
    let init = classical::init_equilibrium(&phi, &field, &vs, &grid)?;
    let psi = MarchingState::pack(&init, 0.5)?.psi;
    Ok((encs, embed_state(&psi, vs.q(), nodes)))
}

/// Padded global system for `n_t` steps of the 1D hill.
pub fn global_system(n_t: usize) -> Result<GlobalSystem> {
    let fx = MarchingFixture::hill_1d(1.3)?;
    let steps = vec![fx.ops.m_omega.clone(); n_t];
    assemble(&steps, &fx.state.psi, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_consistent_dimensions() {
        let fx = MarchingFixture::hill_2d(1.0).unwrap();
        assert_eq!(fx.state.psi.len(), fx.ops.m_omega.cols());
        let (encs, v) = momega_fixture(2).unwrap();
        assert_eq!(v.len(), encs.m_omega.system_dim);
        let sys = global_system(3).unwrap();
        assert_eq!(sys.blocks(), 7);
    }
}
