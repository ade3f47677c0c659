use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::ops::{householder_completion, C64};

/// Unitaries `(P_L, P_R)` on `b` qubits with first columns `c`, `d` such that
/// `β c̄ⱼ dⱼ ≈ yⱼ`.
#[derive(Clone, Debug)]
pub struct StatePrepPair {
    pub p_l: DMatrix<C64>,
    pub p_r: DMatrix<C64>,
    pub beta: f64,
    pub b: usize,
    pub y: Vec<C64>,
    pub c: Vec<C64>,
    pub d: Vec<C64>,
    /// `Σⱼ |β c̄ⱼ dⱼ − yⱼ|`.
    pub delta: f64,
}

impl StatePrepPair {
    /// Requires `‖y‖₁ ≤ β`. The amplitudes are split so both prepared states
    /// are normalised even when `‖y‖₁ < β`.
    pub fn new(y: &[C64], beta: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(invalid("y", "empty coefficient vector"));
        }
        if !(beta > 0.0) {
            return Err(invalid("beta", "must be positive"));
        }
        let l1: f64 = y.iter().map(|z| z.norm()).sum();
        if l1 > beta * (1.0 + 1e-12) {
            return Err(invalid("beta", format!("‖y‖₁ = {l1} exceeds β = {beta}")));
        }
        let b = (usize::BITS - (y.len() - 1).leading_zeros()).max(1) as usize;
        let slots = 1usize << b;
        let mut r: Vec<C64> = y.iter().map(|z| z / beta).collect();
        r.resize(slots, C64::new(0.0, 0.0));
        let mag: Vec<f64> = r.iter().map(|z| z.norm()).collect();
        let s: f64 = mag.iter().sum();

        let mut c = vec![C64::new(0.0, 0.0); slots];
        let mut d = vec![C64::new(0.0, 0.0); slots];
        let spare = mag.iter().position(|&m| m == 0.0);
        if s == 0.0 {
            // y = 0: orthogonal basis states
            c[0] = C64::new(1.0, 0.0);
            d[1] = C64::new(1.0, 0.0);
        } else if (s - 1.0).abs() <= 1e-14 || spare.is_some() {
            for j in 0..slots {
                if mag[j] > 0.0 {
                    let x = mag[j] / s;
                    d[j] = C64::new(x.sqrt(), 0.0);
                    c[j] = r[j].conj() / x.sqrt();
                }
            }
            if let Some(k) = spare {
                // Σ|cⱼ|² = s², the spare slot carries the rest of P_L's column
                c[k] = C64::new((1.0 - s * s).max(0.0).sqrt(), 0.0);
            }
        } else {
            let x = split_weights(&mag, s);
            for j in 0..slots {
                d[j] = C64::new(x[j].sqrt(), 0.0);
                c[j] = r[j].conj() / x[j].sqrt();
            }
        }
        renormalise(&mut c);
        renormalise(&mut d);
        let delta = (0..slots)
            .map(|j| {
                let want = if j < y.len() { y[j] } else { C64::new(0.0, 0.0) };
                (c[j].conj() * d[j] * beta - want).norm()
            })
            .sum();
        Ok(StatePrepPair {
            p_l: householder_completion(&c)?,
            p_r: householder_completion(&d)?,
            beta,
            b,
            y: y.to_vec(),
            c,
            d,
            delta,
        })
    }
}

fn renormalise(v: &mut [C64]) {
    let n = crate::ops::vec::norm(v);
    for z in v {
        *z /= n;
    }
}

/// Weights `x` on the simplex with `Σ mⱼ²/xⱼ = 1`, found by bisection on
/// the segment from `m/s` (where the sum is `s² < 1`) toward the vertex of
/// the smallest entry (where it diverges).
fn split_weights(mag: &[f64], s: f64) -> Vec<f64> {
    let k = mag
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let point = |theta: f64| -> Vec<f64> {
        mag.iter()
            .enumerate()
            .map(|(j, &m)| (1.0 - theta) * m / s + if j == k { theta } else { 0.0 })
            .collect()
    };
    let g = |x: &[f64]| -> f64 { mag.iter().zip(x).map(|(m, xj)| m * m / xj).sum() };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(&point(mid)) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    point(lo)
}
