//! Velocity sets, grids, velocity fields and the physical relations of the
//! BGK model.
//!
//! Velocities are in lattice units (Δx/Δt) throughout, so `cᵢ·u / c_s²`
//! reduces to `3 eᵢ·u` regardless of the grid spacing.

use std::path::Path;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{invalid, Error, Result};
use crate::ops::StructuredOperator;

#[derive(Clone, Debug, PartialEq)]
pub struct VelocitySet {
    pub name: &'static str,
    pub d: usize,
    pub e: Vec<[i32; 2]>,
    pub w: Vec<f64>,
    pub w_exact: Vec<Ratio<i64>>,
}

impl VelocitySet {
    pub fn q(&self) -> usize {
        self.e.len()
    }

    /// `3 eᵢ·u`, i.e. `cᵢ·u / c_s²` in lattice units.
    pub fn projection(&self, i: usize, u: [f64; 2]) -> f64 {
        let e = self.e[i];
        3.0 * (e[0] as f64 * u[0] + e[1] as f64 * u[1])
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "d2q5" => Ok(d2q5()),
            "d1q3" => Ok(d1q3()),
            other => Err(invalid("model", format!("unknown lattice model `{other}`"))),
        }
    }
}

fn weights(num: &[i64], den: i64) -> (Vec<f64>, Vec<Ratio<i64>>) {
    let exact: Vec<Ratio<i64>> = num.iter().map(|&n| Ratio::new(n, den)).collect();
    let float = num.iter().map(|&n| n as f64 / den as f64).collect();
    (float, exact)
}

pub fn d2q5() -> VelocitySet {
    let (w, w_exact) = weights(&[2, 1, 1, 1, 1], 6);
    VelocitySet {
        name: "d2q5",
        d: 2,
        e: vec![[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]],
        w,
        w_exact,
    }
}

pub fn d1q3() -> VelocitySet {
    let (w, w_exact) = weights(&[4, 1, 1], 6);
    VelocitySet {
        name: "d1q3",
        d: 1,
        e: vec![[0, 0], [1, 0], [-1, 0]],
        w,
        w_exact,
    }
}

/// Periodic grid with `N = nx·ny` nodes indexed `j = iy·nx + ix`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dt: f64) -> Result<Self> {
        for (name, v) in [("nx", nx), ("ny", ny)] {
            if v == 0 || !v.is_power_of_two() {
                return Err(invalid(name, format!("{v} is not a positive power of two")));
            }
        }
        if !(dx > 0.0 && dt > 0.0 && dx.is_finite() && dt.is_finite()) {
            return Err(invalid("dx/dt", "spacings must be positive and finite"));
        }
        Ok(GridSpec { nx, ny, dx, dt })
    }

    /// Unit spacing grid.
    pub fn unit(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, 1.0, 1.0)
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Qubits addressing the nodes, `n = log2 N`.
    pub fn qubits(&self) -> usize {
        self.nodes().trailing_zeros() as usize
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, j: usize) -> (usize, usize) {
        (j % self.nx, j / self.nx)
    }

    pub fn lattice_speed(&self) -> f64 {
        self.dx / self.dt
    }

    pub fn sound_speed_sq(&self) -> f64 {
        let c = self.lattice_speed();
        c * c / 3.0
    }

    /// Node reached from `j` by moving along `e` with periodic wraparound.
    pub fn neighbor(&self, j: usize, e: [i32; 2]) -> usize {
        let (ix, iy) = self.coords(j);
        let wrap = |x: usize, d: i32, n: usize| ((x as i64 + d as i64).rem_euclid(n as i64)) as usize;
        self.index(wrap(ix, e[0], self.nx), wrap(iy, e[1], self.ny))
    }
}

/// Advection velocity in lattice units.
#[derive(Clone, Debug)]
pub enum VelocityField {
    Uniform([f64; 2]),
    PerNode(Arc<Vec<[f64; 2]>>),
    /// One table per step; steps beyond the last table reuse it.
    TimeIndexed(Arc<Vec<Vec<[f64; 2]>>>),
}

impl VelocityField {
    pub fn zero() -> Self {
        VelocityField::Uniform([0.0, 0.0])
    }

    pub fn at(&self, node: usize, step: usize) -> [f64; 2] {
        match self {
            VelocityField::Uniform(u) => *u,
            VelocityField::PerNode(t) => t[node],
            VelocityField::TimeIndexed(ts) => ts[step.min(ts.len() - 1)][node],
        }
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self, VelocityField::TimeIndexed(ts) if ts.len() > 1)
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let tables: Vec<&[[f64; 2]]> = match self {
            VelocityField::Uniform(u) => vec![std::slice::from_ref(u)],
            VelocityField::PerNode(t) => {
                if t.len() != grid.nodes() {
                    return Err(Error::DimensionMismatch {
                        context: "velocity table",
                        expected: grid.nodes(),
                        got: t.len(),
                    });
                }
                vec![t.as_slice()]
            }
            VelocityField::TimeIndexed(ts) => {
                if ts.is_empty() {
                    return Err(invalid("velocity", "empty time-indexed table"));
                }
                for t in ts.iter() {
                    if t.len() != grid.nodes() {
                        return Err(Error::DimensionMismatch {
                            context: "velocity table",
                            expected: grid.nodes(),
                            got: t.len(),
                        });
                    }
                }
                ts.iter().map(|t| t.as_slice()).collect()
            }
        };
        if tables.iter().flat_map(|t| t.iter()).any(|u| !u[0].is_finite() || !u[1].is_finite()) {
            return Err(invalid("velocity", "non-finite entry"));
        }
        Ok(())
    }

    /// Every velocity the field can produce, used for sup-norm checks.
    fn all_values(&self) -> Vec<[f64; 2]> {
        match self {
            VelocityField::Uniform(u) => vec![*u],
            VelocityField::PerNode(t) => t.to_vec(),
            VelocityField::TimeIndexed(ts) => ts.iter().flatten().copied().collect(),
        }
    }

    /// Reads a table with header `ix,iy,ux,uy`.
    pub fn from_csv(path: &Path, grid: &GridSpec) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut table = vec![None; grid.nodes()];
        for row in reader.records() {
            let row = row?;
            if row.len() != 4 {
                return Err(Error::Parse(format!("expected 4 columns, found {}", row.len())));
            }
            let parse_usize = |k: usize| -> Result<usize> {
                row[k].trim().parse().map_err(|_| Error::Parse(format!("bad index `{}`", &row[k])))
            };
            let parse_f64 = |k: usize| -> Result<f64> {
                row[k].trim().parse().map_err(|_| Error::Parse(format!("bad velocity `{}`", &row[k])))
            };
            let (ix, iy) = (parse_usize(0)?, parse_usize(1)?);
            if ix >= grid.nx || iy >= grid.ny {
                return Err(Error::Parse(format!("node ({ix}, {iy}) is outside the grid")));
            }
            table[grid.index(ix, iy)] = Some([parse_f64(2)?, parse_f64(3)?]);
        }
        let table: Option<Vec<[f64; 2]>> = table.into_iter().collect();
        let table = table.ok_or_else(|| Error::Parse("velocity table does not cover every node".into()))?;
        let field = VelocityField::PerNode(Arc::new(table));
        field.validate(grid)?;
        Ok(field)
    }
}

pub const LOW_MACH_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowMachReport {
    pub holds: bool,
    pub max_ux: f64,
    pub max_uy: f64,
    pub bound: f64,
}

/// `sup|u_x|, sup|u_y| ≤ 1/3` in lattice units (the same bound is assumed in 1D).
pub fn check_low_mach(field: &VelocityField) -> LowMachReport {
    let (mut mx, mut my) = (0.0f64, 0.0f64);
    for u in field.all_values() {
        mx = mx.max(u[0].abs());
        my = my.max(u[1].abs());
    }
    let bound = 1.0 / 3.0;
    LowMachReport {
        holds: mx <= bound + LOW_MACH_SLACK && my <= bound + LOW_MACH_SLACK,
        max_ux: mx,
        max_uy: my,
        bound,
    }
}

/// `wᵢ max_j |1 + cᵢ·u_j/c_s²| ≤ 1` for every direction, at one step.
pub fn check_weight_condition(vs: &VelocitySet, grid: &GridSpec, field: &VelocityField, step: usize) -> Result<()> {
    for j in 0..grid.nodes() {
        let u = field.at(j, step);
        for i in 0..vs.q() {
            let value = vs.w[i] * (1.0 + vs.projection(i, u)).abs();
            if value > 1.0 + 1e-12 {
                return Err(Error::WeightCondition {
                    node: j,
                    direction: i,
                    value,
                });
            }
        }
    }
    Ok(())
}

/// `fᵢ^eq = wᵢ φ (1 + cᵢ·u / c_s²)`.
pub fn equilibrium(phi: f64, u: [f64; 2], vs: &VelocitySet) -> Vec<f64> {
    (0..vs.q()).map(|i| vs.w[i] * phi * (1.0 + vs.projection(i, u))).collect()
}

/// True when some `|cᵢ·u| > c_s²`, the regime where equilibria can turn negative.
pub fn equilibrium_may_be_negative(u: [f64; 2], vs: &VelocitySet) -> bool {
    (0..vs.q()).any(|i| vs.projection(i, u).abs() > 1.0 + LOW_MACH_SLACK)
}

pub fn moment_phi(f: &[f64]) -> f64 {
    f.iter().sum()
}

/// `D = (τ* − 1/2) Δx² / (3 Δt)`.
pub fn diffusion_coefficient(tau_star: f64, grid: &GridSpec) -> f64 {
    if tau_star <= 0.5 {
        log::warn!("tau* = {tau_star} gives a non-positive diffusion coefficient");
    }
    (tau_star - 0.5) / 3.0 * grid.dx * grid.dx / grid.dt
}

/// `S e_i = e_{(i+1) mod n}`.
pub fn shift_operator(n: usize) -> StructuredOperator {
    StructuredOperator::cyclic_shift(n, 1)
}

/// The node remapping `Pᵢ` for direction `i`.
pub fn streaming_permutation(vs: &VelocitySet, grid: &GridSpec, i: usize) -> Result<StructuredOperator> {
    if i >= vs.q() {
        return Err(invalid("direction", format!("{i} >= Q = {}", vs.q())));
    }
    let [ex, ey] = vs.e[i];
    if ex == 0 && ey == 0 {
        return Ok(StructuredOperator::identity(grid.nodes()));
    }
    let sx = StructuredOperator::cyclic_shift(grid.nx, ex as i64);
    if grid.ny == 1 {
        return Ok(sx);
    }
    let sy = StructuredOperator::cyclic_shift(grid.ny, ey as i64);
    Ok(StructuredOperator::tensor(sy, sx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{vec, verify_unitary};

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    fn exact_moments(vs: &VelocitySet) -> (Ratio<i64>, [Ratio<i64>; 2], [[Ratio<i64>; 2]; 2]) {
        let mut m0 = r(0, 1);
        let mut m1 = [r(0, 1); 2];
        let mut m2 = [[r(0, 1); 2]; 2];
        for (w, e) in vs.w_exact.iter().zip(&vs.e) {
            m0 += w;
            for a in 0..2 {
                m1[a] += w * e[a] as i64;
                for b in 0..2 {
                    m2[a][b] += w * (e[a] * e[b]) as i64;
                }
            }
        }
        (m0, m1, m2)
    }

    #[test]
    fn d2q5_moments_are_exact() {
        let vs = d2q5();
        assert_eq!(vs.w, vec![2.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]);
        let (m0, m1, m2) = exact_moments(&vs);
        assert_eq!(m0, r(1, 1));
        assert_eq!(m1, [r(0, 1); 2]);
        assert_eq!(m2, [[r(1, 3), r(0, 1)], [r(0, 1), r(1, 3)]]);
    }

    #[test]
    fn d1q3_moments_are_exact() {
        let vs = d1q3();
        let (m0, m1, m2) = exact_moments(&vs);
        assert_eq!(m0, r(1, 1));
        assert_eq!(m1[0], r(0, 1));
        assert_eq!(m2[0][0], r(1, 3));
        assert_eq!(vs.e[0], [0, 0]);
    }

    #[test]
    fn equilibrium_examples() {
        let vs = d2q5();
        let f = equilibrium(0.3, [0.0, 0.0], &vs);
        let expected = [0.1, 0.05, 0.05, 0.05, 0.05];
        for (a, b) in f.iter().zip(expected) {
            assert!((a - b).abs() < 1e-16);
        }
        assert!((moment_phi(&f) - 0.3).abs() < 1e-16);

        let f = equilibrium(1.0, [1.0 / 3.0, 0.0], &vs);
        assert!((f[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(f[2].abs() < 1e-15);
        assert!(!equilibrium_may_be_negative([1.0 / 3.0, 0.0], &vs));
        assert!(equilibrium_may_be_negative([0.4, 0.0], &vs));
    }

    #[test]
    fn equilibrium_moments_match_phi_and_flux() {
        for vs in [d2q5(), d1q3()] {
            for &(phi, u) in &[(0.7, [0.1, -0.2]), (2.5, [-0.3, 0.05]), (0.0, [0.2, 0.2])] {
                let u = if vs.d == 1 { [u[0], 0.0] } else { u };
                let f = equilibrium(phi, u, &vs);
                assert!((moment_phi(&f) - phi).abs() <= 1e-15 * phi.max(1.0));
                for a in 0..2 {
                    let flux: f64 = f.iter().zip(&vs.e).map(|(fi, e)| fi * e[a] as f64).sum();
                    assert!((flux - phi * u[a]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn low_mach_examples() {
        assert!(check_low_mach(&VelocityField::Uniform([0.2, 0.2])).holds);
        let bad = check_low_mach(&VelocityField::Uniform([0.4, 0.0]));
        assert!(!bad.holds && bad.max_ux == 0.4);
        assert!(check_low_mach(&VelocityField::zero()).holds);
    }

    #[test]
    fn diffusion_examples() {
        let g = GridSpec::unit(4, 1).unwrap();
        assert!((diffusion_coefficient(0.8, &g) - 0.1).abs() < 1e-15);
        assert_eq!(diffusion_coefficient(0.5, &g), 0.0);
        assert!((diffusion_coefficient(1.3, &g) - 0.8 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn shift_properties() {
        let s = shift_operator(4);
        assert_eq!(s.apply(&vec::basis(4, 3)).unwrap(), vec::basis(4, 0));
        let mut v = vec::from_real(&[1.0, 2.0, 3.0, 4.0]);
        let orig = v.clone();
        for _ in 0..4 {
            v = s.apply(&v).unwrap();
        }
        assert_eq!(v, orig);
        assert!(verify_unitary(&s, 1e-14).unitary);
    }

    #[test]
    fn streaming_matches_neighbor_map() {
        let vs = d2q5();
        let g = GridSpec::unit(4, 8).unwrap();
        for i in 0..vs.q() {
            let p = streaming_permutation(&vs, &g, i).unwrap();
            assert!(verify_unitary(&p, 1e-14).unitary);
            for j in 0..g.nodes() {
                let out = p.apply(&vec::basis(g.nodes(), j)).unwrap();
                assert_eq!(out, vec::basis(g.nodes(), g.neighbor(j, vs.e[i])), "dir {i} node {j}");
            }
        }
        let g1 = GridSpec::unit(4, 1).unwrap();
        let p1 = streaming_permutation(&d1q3(), &g1, 1).unwrap();
        assert_eq!(p1.apply(&vec::basis(4, 3)).unwrap(), vec::basis(4, 0));
        let p2 = streaming_permutation(&d1q3(), &g1, 2).unwrap();
        let both = StructuredOperator::product(vec![p2, p1]).unwrap().materialize().unwrap();
        assert_eq!(both, StructuredOperator::identity(4).materialize().unwrap());
        assert!(streaming_permutation(&d1q3(), &g1, 3).is_err());
    }

    #[test]
    fn grid_rejects_non_power_of_two() {
        assert!(GridSpec::unit(6, 1).is_err());
        assert!(GridSpec::new(4, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn velocity_csv_round_trip() {
        let dir = std::env::temp_dir().join(format!("qlbm-vel-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u.csv");
        std::fs::write(&path, "ix,iy,ux,uy\n0,0,0.1,0\n1,0,-0.2,0.05\n").unwrap();
        let g = GridSpec::unit(2, 1).unwrap();
        let field = VelocityField::from_csv(&path, &g).unwrap();
        assert_eq!(field.at(1, 0), [-0.2, 0.05]);
        std::fs::write(&path, "ix,iy,ux,uy\n0,0,0.1,0\n").unwrap();
        assert!(VelocityField::from_csv(&path, &g).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }
}
