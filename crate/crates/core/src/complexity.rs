//! Analytic query counts for the two quantum algorithms.
//!
//! Every big-O constant is fixed to 1 and logarithms are natural. The
//! `formulas` field names the expression behind each stored number.

use std::f64::consts::E;

use crate::encoding::lbm::alpha_m;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    TimeMarching,
    LinearSystem,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::TimeMarching => "timemarch",
            Algorithm::LinearSystem => "qlsa",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ComplexityReport {
    pub algorithm: Algorithm,
    pub n_t: usize,
    /// Target accuracy relative to `‖ψ(t₀)‖`.
    pub epsilon: f64,
    pub norm_ratio: f64,
    pub psi0_norm: f64,
    pub omega: f64,
    pub alpha_m: f64,
    /// `1/N_t` for time marching; unused by the linear-system solver.
    pub delta: Option<f64>,
    /// Per-step error `ε/(e N_t)` or the solver tolerance `ε'/(N_t ‖ψ(t₀)‖)`.
    pub inner_epsilon: f64,
    /// Oracle queries per step (time marching) or per solve (linear system).
    pub queries_per_step: f64,
    /// Amplification cost of one step with the explicit `α_M`, time marching only.
    pub usva_queries: Option<f64>,
    /// `(1 − δ)^{N_t}` and its lower bound `e^{−1/(1−1/N_t)}`.
    pub amplification: Option<(f64, f64)>,
    pub g: f64,
    /// `norm_ratio / (1 − δ)^{N_t}`, the repetition count before dropping constants.
    pub g_bound: f64,
    /// `g · queries_per_step`: queries to each step's oracle.
    pub headline_queries: f64,
    pub total_queries: f64,
    pub formulas: Vec<(&'static str, &'static str)>,
}

/// `(α / (δ s)) · ln(α / (s ε))`.
pub fn usva_queries(alpha: f64, s: f64, delta: f64, epsilon: f64) -> f64 {
    alpha / (delta * s) * (alpha / (s * epsilon)).ln()
}

/// `(1 − 1/N)^N ≥ e^{−1/(1−1/N)}` at one `N ≥ 2`.
pub fn amplification_inequality(n_t: usize) -> (f64, f64, bool) {
    let n = n_t as f64;
    let lhs = (1.0 - 1.0 / n).powf(n);
    let rhs = (-1.0 / (1.0 - 1.0 / n)).exp();
    (lhs, rhs, lhs >= rhs)
}

fn check_common(n_t: usize, norm_ratio: f64, omega: f64) -> Result<()> {
    if n_t < 2 {
        return Err(invalid("n_t", "at least two steps are required"));
    }
    if !(norm_ratio > 0.0) {
        return Err(invalid("norm_ratio", "must be positive"));
    }
    crate::marching::check_omega(omega)
}

pub fn timemarch_complexity(n_t: usize, epsilon: f64, norm_ratio: f64, omega: f64) -> Result<ComplexityReport> {
    check_common(n_t, norm_ratio, omega)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", "must lie in (0, 1)"));
    }
    let n = n_t as f64;
    let delta = 1.0 / n;
    let inner = epsilon / (E * n);
    let alpha = alpha_m(omega);
    let (lhs, rhs, _) = amplification_inequality(n_t);
    let per_step = n * (n / epsilon).ln();
    let g = norm_ratio;
    Ok(ComplexityReport {
        algorithm: Algorithm::TimeMarching,
        n_t,
        epsilon,
        norm_ratio,
        psi0_norm: 1.0,
        omega,
        alpha_m: alpha,
        delta: Some(delta),
        inner_epsilon: inner,
        queries_per_step: per_step,
        usva_queries: Some(usva_queries(alpha, 1.0, delta, inner)),
        amplification: Some((lhs, rhs)),
        g,
        g_bound: norm_ratio / lhs,
        headline_queries: g * per_step,
        total_queries: g * n * per_step,
        formulas: vec![
            ("delta", "1/N_t"),
            ("inner_epsilon", "ε/(e·N_t)"),
            ("queries_per_step", "N_t·ln(N_t/ε)"),
            ("usva_queries", "(α_M/δ)·ln(α_M/inner_epsilon)"),
            ("g", "‖ψ(t₀)‖/‖ψ(T)‖"),
            ("g_bound", "g/(1−δ)^N_t"),
            ("headline_queries", "g·queries_per_step"),
            ("total_queries", "g·N_t·queries_per_step"),
        ],
    })
}

/// `epsilon` here is the absolute tolerance `ε'`, with `ε' ≤ N_t ‖ψ(t₀)‖`.
pub fn qlsa_complexity(n_t: usize, epsilon: f64, psi0_norm: f64, norm_ratio: f64, omega: f64) -> Result<ComplexityReport> {
    check_common(n_t, norm_ratio, omega)?;
    let n = n_t as f64;
    if !(psi0_norm > 0.0) {
        return Err(invalid("psi0_norm", "must be positive"));
    }
    if !(epsilon > 0.0 && epsilon <= n * psi0_norm) {
        return Err(invalid("epsilon", "must lie in (0, N_t·‖ψ(t₀)‖]"));
    }
    let alpha = alpha_m(omega);
    let inner = epsilon / (n * psi0_norm);
    let per_solve = alpha * (n + 1.0) * (1.0 / inner).ln();
    let g = norm_ratio;
    Ok(ComplexityReport {
        algorithm: Algorithm::LinearSystem,
        n_t,
        epsilon,
        norm_ratio,
        psi0_norm,
        omega,
        alpha_m: alpha,
        delta: None,
        inner_epsilon: inner,
        queries_per_step: per_solve,
        usva_queries: None,
        amplification: None,
        g,
        g_bound: g,
        headline_queries: g * per_solve,
        total_queries: g * per_solve,
        formulas: vec![
            ("inner_epsilon", "ε'/(N_t·‖ψ(t₀)‖)"),
            ("queries_per_step", "α_M·(N_t+1)·ln(1/inner_epsilon)"),
            ("g", "‖ψ(t₀)‖/‖ψ(T)‖"),
            ("headline_queries", "g·queries_per_step"),
            ("total_queries", "g·queries_per_step"),
        ],
    })
}
