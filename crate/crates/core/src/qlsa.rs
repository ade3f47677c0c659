//! The whole trajectory as one block lower-bidiagonal linear system.
//!
//! `L Ψ = F` with identity diagonal blocks, `−B_n` below the diagonal and
//! `F = [ψ⁰; 0; …; 0]`. The padded system appends `N_t` copy equations
//! `ψ^{n+1} − ψ^n = 0` so the final state fills half of `Ψ`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::{be_diagonal, be_product, be_select, be_weighted_lcu, be_zero, BlockEncoding};
use crate::error::{invalid, Error, Result};
use crate::ops::{random_unit_vector, spectral_norm_with, vec, NormMethod, NormOptions, StructuredOperator, C64};

#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub l: StructuredOperator,
    pub f: Vec<C64>,
    pub n_t: usize,
    pub padded: bool,
    pub block_dim: usize,
    /// Subdiagonal blocks in order, copies included.
    pub sub: Vec<StructuredOperator>,
}

impl GlobalSystem {
    pub fn blocks(&self) -> usize {
        self.sub.len() + 1
    }

    pub fn dim(&self) -> usize {
        self.blocks() * self.block_dim
    }
}

pub fn assemble(steps: &[StructuredOperator], psi0: &[C64], pad: bool) -> Result<GlobalSystem> {
    let n_t = steps.len();
    if n_t == 0 {
        return Err(invalid("steps", "at least one step is required"));
    }
    let d = psi0.len();
    for b in steps {
        if b.rows() != d || b.cols() != d {
            return Err(Error::DimensionMismatch {
                context: "global system block",
                expected: d,
                got: b.cols(),
            });
        }
        if d <= 256 {
            let norm = b.materialize()?.singular_values().max();
            if norm > 1.0 + 1e-12 {
                log::warn!("step matrix has norm {norm} > 1; the conditioning bounds do not apply");
            }
        }
    }
    let mut sub = steps.to_vec();
    if pad {
        sub.extend(std::iter::repeat(StructuredOperator::identity(d)).take(n_t));
    }
    let total = (sub.len() + 1) * d;
    let lower = StructuredOperator::embedding(StructuredOperator::direct_sum(sub.clone())?, total, total, d, 0)?;
    let l = StructuredOperator::sum(vec![
        (C64::new(1.0, 0.0), StructuredOperator::identity(total)),
        (C64::new(-1.0, 0.0), lower),
    ])?;
    let mut f = vec![C64::new(0.0, 0.0); total];
    f[..d].copy_from_slice(psi0);
    Ok(GlobalSystem {
        l,
        f,
        n_t,
        padded: pad,
        block_dim: d,
        sub,
    })
}

/// `L⁻¹ r` by forward substitution.
pub fn solve_lower(sys: &GlobalSystem, rhs: &[C64]) -> Result<Vec<C64>> {
    let d = sys.block_dim;
    if rhs.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            context: "forward substitution",
            expected: sys.dim(),
            got: rhs.len(),
        });
    }
    let mut x = rhs.to_vec();
    for (n, b) in sys.sub.iter().enumerate() {
        let y = b.apply(&x[n * d..(n + 1) * d])?;
        for (xi, yi) in x[(n + 1) * d..(n + 2) * d].iter_mut().zip(y) {
            *xi += yi;
        }
    }
    Ok(x)
}

/// `L⁻ᴴ r` by backward substitution.
pub fn solve_upper_adjoint(sys: &GlobalSystem, rhs: &[C64]) -> Result<Vec<C64>> {
    let d = sys.block_dim;
    let mut x = rhs.to_vec();
    for (n, b) in sys.sub.iter().enumerate().rev() {
        let y = b.apply_adjoint(&x[(n + 1) * d..(n + 2) * d])?;
        for (xi, yi) in x[n * d..(n + 1) * d].iter_mut().zip(y) {
            *xi += yi;
        }
    }
    Ok(x)
}

/// `Ψ` split into blocks, with the residual `‖LΨ − F‖ / ‖F‖`.
pub fn solve_forward(sys: &GlobalSystem) -> Result<(Vec<Vec<C64>>, f64)> {
    let x = solve_lower(sys, &sys.f)?;
    let r = sys.l.apply(&x)?;
    let residual = vec::dist(&r, &sys.f) / vec::norm(&sys.f).max(f64::MIN_POSITIVE);
    Ok((x.chunks(sys.block_dim).map(|c| c.to_vec()).collect(), residual))
}

#[derive(Clone, Debug)]
pub struct SingularBoundReport {
    pub n_t: usize,
    pub block_dim: usize,
    /// Subdiagonal blocks, `N_t` unpadded and `2N_t` padded.
    pub steps: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub inverse_norm: f64,
    pub bound_max: f64,
    pub bound_min: f64,
    pub max_ok: bool,
    pub min_ok: bool,
    pub inverse_ok: bool,
    pub method: NormMethod,
}

impl SingularBoundReport {
    pub fn passes(&self) -> bool {
        self.max_ok && self.min_ok
    }
}

/// Largest eigenvalue of `L⁻¹ L⁻ᴴ` by power iteration, returned as `‖L⁻¹‖`.
fn inverse_norm_power(sys: &GlobalSystem, tol: f64, max_iter: usize, seed: u64) -> Result<(f64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_unit_vector(sys.dim(), &mut rng);
    let mut last: f64 = 0.0;
    for it in 1..=max_iter {
        let w = solve_lower(sys, &solve_upper_adjoint(sys, &v)?)?;
        let lambda = vec::norm(&w);
        if lambda == 0.0 {
            return Ok((0.0, it));
        }
        v = vec::scaled(&w, 1.0 / lambda);
        if (lambda - last).abs() <= tol * lambda {
            return Ok((lambda.sqrt(), it));
        }
        last = lambda;
    }
    Err(Error::NoConvergence {
        estimate: last.sqrt(),
        iterations: max_iter,
        residual: f64::NAN,
    })
}

/// Checks `σ_max(L) ≤ 2`, `σ_min(L) ≥ 1/(K+1)` and `‖L⁻¹‖ ≤ K+1` with `K`
/// subdiagonal blocks, each up to `slack`.
pub fn singular_bounds(sys: &GlobalSystem, slack: f64) -> Result<SingularBoundReport> {
    let k = sys.sub.len();
    let opts = NormOptions {
        tol: 1e-12,
        ..NormOptions::default()
    };
    let (sigma_max, sigma_min, method) = if sys.dim() <= opts.dense_threshold {
        let s = sys.l.materialize()?.singular_values();
        (s.max(), s.min(), NormMethod::DenseSvd)
    } else {
        let smax = spectral_norm_with(&sys.l, &opts)?.spectral_norm_estimate;
        let (inv, _) = inverse_norm_power(sys, 1e-12, 20_000, opts.seed)?;
        (smax, 1.0 / inv, NormMethod::PowerIteration)
    };
    let inverse_norm = 1.0 / sigma_min;
    let bound_min = 1.0 / (k as f64 + 1.0);
    Ok(SingularBoundReport {
        n_t: sys.n_t,
        block_dim: sys.block_dim,
        steps: k,
        sigma_max,
        sigma_min,
        inverse_norm,
        bound_max: 2.0,
        bound_min,
        max_ok: sigma_max <= 2.0 + slack,
        min_ok: sigma_min >= bound_min - slack,
        inverse_ok: inverse_norm <= k as f64 + 1.0 + 1e-6,
        method,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SigmaProbe {
    /// Largest `‖L v‖` seen over unit iterates, never above `σ_max(L)`.
    pub lower_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The lower bound passed `stop_above`, certifying `σ_max(L) > stop_above`.
    pub exceeded: bool,
}

/// Power iteration on `LᴴL` for systems too large for [`singular_bounds`].
pub fn sigma_max_probe(sys: &GlobalSystem, stop_above: f64, tol: f64, max_iter: usize, seed: u64) -> Result<SigmaProbe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_unit_vector(sys.dim(), &mut rng);
    let mut best: f64 = 0.0;
    let mut last: f64 = 0.0;
    for it in 1..=max_iter {
        let w = sys.l.apply(&v)?;
        let s = vec::norm(&w);
        best = best.max(s);
        let exceeded = best > stop_above;
        let converged = (s - last).abs() <= tol * s;
        if exceeded || converged || it == max_iter {
            return Ok(SigmaProbe {
                lower_bound: best,
                iterations: it,
                converged,
                exceeded,
            });
        }
        let z = sys.l.apply_adjoint(&w)?;
        v = vec::scaled(&z, 1.0 / vec::norm(&z));
        last = s;
    }
    unreachable!("the loop returns on its last iteration")
}

/// `Σ_k |k⟩⟨k| ⊗ B_k` over the `K+1` block rows: one slot per subdiagonal
/// block and a zero slot for the last row. Copy blocks are identities
/// encoded with the shared constants.
pub fn hamt_oracle(encodings: &[BlockEncoding], copies: usize) -> Result<BlockEncoding> {
    let first = encodings.first().ok_or_else(|| invalid("encodings", "at least one step is required"))?;
    let (alpha, m, d) = (first.alpha, first.ancillas, first.system_dim);
    for e in encodings {
        if (e.alpha - alpha).abs() > 1e-12 * alpha || e.ancillas != m || e.system_dim != d {
            return Err(Error::IncompatibleEncodings(format!(
                "`{}` has (α, m, dim) = ({}, {}, {}), expected ({alpha}, {m}, {d})",
                e.label, e.alpha, e.ancillas, e.system_dim
            )));
        }
    }
    if m == 0 {
        return Err(invalid("encodings", "at least one ancilla is required"));
    }
    let mut slots = encodings.to_vec();
    if copies > 0 {
        let id = be_diagonal(&vec![C64::new(1.0 / alpha, 0.0); d], "I")?
            .rescaled(alpha)?
            .padded(m)?;
        slots.extend(std::iter::repeat(id).take(copies));
    }
    slots.push(be_zero(d, alpha, m)?);
    Ok(be_select(&slots)?.with_label("HAM-T"))
}

/// `L = I − (shift ⊗ I) · HAM-T`, normalisation `α_B + 1`.
pub fn l_encoding(hamt: &BlockEncoding, block_dim: usize) -> Result<BlockEncoding> {
    let blocks = hamt.system_dim / block_dim;
    let shift = BlockEncoding::of_unitary(
        StructuredOperator::tensor(
            StructuredOperator::cyclic_shift(blocks, 1),
            StructuredOperator::identity(block_dim),
        ),
        "shift",
    )?;
    let lower = be_product(&shift, hamt)?;
    let id = BlockEncoding::of_unitary(StructuredOperator::identity(hamt.system_dim), "I")?;
    let one = C64::new(1.0, 0.0);
    Ok(be_weighted_lcu(&[one, -one], &[id, lower], None)?.with_label("L"))
}

/// Dense `L` assembled entry by entry, for tests.
pub fn dense_l(sub: &[DMatrix<C64>]) -> DMatrix<C64> {
    let d = sub[0].nrows();
    let total = (sub.len() + 1) * d;
    let mut l = DMatrix::identity(total, total);
    for (n, b) in sub.iter().enumerate() {
        l.view_mut(((n + 1) * d, n * d), (d, d)).copy_from(&(-b));
    }
    l
}
