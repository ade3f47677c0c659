//! Measurement-free multi-step evolution with a counter register.
//!
//! The dilated state lives on `counter ⊗ ancilla ⊗ system`, counter most
//! significant. Each step applies `S · (I ⊗ U_j)`; `S` increments the
//! counter whenever the ancillas are not all zero, so the counter-0,
//! ancilla-0 block carries `Ξ_j ⋯ Ξ_1 ψ(t₀) / (α_j ⋯ α_1 ‖ψ(t₀)‖)`.

use nalgebra::{DMatrix, DVector};

use crate::complexity::usva_queries;
use crate::encoding::BlockEncoding;
use crate::error::{invalid, Error, Result};
use crate::ops::{unitary_completion, vec, PermutationMap, StructuredOperator, C64};

/// Counter qubits for `n_t` steps: `2^{n_c} ≥ n_t + 1`, at least one.
pub fn counter_qubits(n_t: usize) -> usize {
    let need = n_t + 1;
    (usize::BITS - (need - 1).leading_zeros()).max(1) as usize
}

/// `|c⟩ → |c + 1 mod 2^{n_c}⟩`.
pub fn add_operator(n_c: usize) -> Result<StructuredOperator> {
    if n_c == 0 {
        return Err(invalid("counter_qubits", "at least one counter qubit is required"));
    }
    Ok(StructuredOperator::cyclic_shift(1 << n_c, 1))
}

fn projector_zero(dim: usize) -> Result<StructuredOperator> {
    StructuredOperator::embedding(StructuredOperator::identity(1), dim, dim, 0, 0)
}

/// `S = (ADD† ⊗ |0⟩⟨0| ⊗ I + I ⊗ (I − |0⟩⟨0|) ⊗ I)(ADD ⊗ I ⊗ I)`.
pub fn relocation(n_c: usize, ancillas: usize, system_dim: usize) -> Result<StructuredOperator> {
    let add = add_operator(n_c)?;
    let (cdim, adim) = (1usize << n_c, 1usize << ancillas);
    // undo the increment on the ancilla-0 branch; built as a select over
    // (ancilla, counter, system) and moved to (counter, ancilla, system)
    let mut branches = vec![StructuredOperator::tensor(add.adjoint(), StructuredOperator::identity(system_dim))];
    if adim > 1 {
        branches.push(StructuredOperator::identity((adim - 1) * cdim * system_dim));
    }
    let undo = StructuredOperator::reordered(
        StructuredOperator::direct_sum(branches)?,
        &[cdim, adim, system_dim],
        &[1, 0, 2],
    )?;
    let shift = StructuredOperator::tensor(add, StructuredOperator::identity(adim * system_dim));
    StructuredOperator::product(vec![undo, shift])
}

/// `S = I ⊗ |0⟩⟨0| ⊗ I + ADD ⊗ Σ_{j≥1} |j⟩⟨j| ⊗ I`, for comparison.
pub fn relocation_direct(n_c: usize, ancillas: usize, system_dim: usize) -> Result<StructuredOperator> {
    let add = add_operator(n_c)?;
    let adim = 1usize << ancillas;
    let zero = projector_zero(adim)?;
    let mut rest = vec![1.0; adim];
    rest[0] = 0.0;
    let id_s = StructuredOperator::identity(system_dim);
    StructuredOperator::real_sum(vec![
        (
            1.0,
            StructuredOperator::tensor_all(vec![StructuredOperator::identity(1 << n_c), zero, id_s.clone()])?,
        ),
        (
            1.0,
            StructuredOperator::tensor_all(vec![add, StructuredOperator::real_diagonal(&rest), id_s])?,
        ),
    ])
}

#[derive(Clone, Debug)]
pub struct DilatedState {
    pub psi: Vec<C64>,
    pub counter_qubits: usize,
    pub ancillas: usize,
    pub system_dim: usize,
    pub step: usize,
}

impl DilatedState {
    fn block_len(&self) -> usize {
        self.system_dim << self.ancillas
    }

    pub fn counter_block(&self, c: usize) -> &[C64] {
        let b = self.block_len();
        &self.psi[c * b..(c + 1) * b]
    }

    /// The counter-0, ancilla-0 block.
    pub fn success_block(&self) -> &[C64] {
        &self.psi[..self.system_dim]
    }

    pub fn counter_norms(&self) -> Vec<f64> {
        (0..1usize << self.counter_qubits).map(|c| vec::norm(self.counter_block(c))).collect()
    }

    /// Norm of the ancilla-0 part of every counter block.
    pub fn ancilla_zero_norms(&self) -> Vec<f64> {
        (0..1usize << self.counter_qubits)
            .map(|c| vec::norm(&self.counter_block(c)[..self.system_dim]))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct StepRecord {
    pub step: usize,
    pub counter_norms: Vec<f64>,
    pub ancilla_zero_norms: Vec<f64>,
    pub success_prob: f64,
    pub total_norm: f64,
}

#[derive(Clone, Debug)]
pub struct DilatedRun {
    pub state: DilatedState,
    pub records: Vec<StepRecord>,
    pub success_prob: f64,
    /// `(Π αⱼ)⁻² ‖ψ(T)‖² / ‖ψ(t₀)‖²` with `ψ(T)` from the encodings' targets.
    pub predicted_prob: f64,
    pub alpha_product: f64,
    pub psi0_norm: f64,
    /// The success block rescaled by `Π αⱼ · ‖ψ(t₀)‖`.
    pub estimate: Vec<C64>,
    /// `ψ(T)` from the targets.
    pub exact: Vec<C64>,
}

fn check_sequence(psi0: &[C64], encodings: &[BlockEncoding]) -> Result<usize> {
    let first = encodings.first().ok_or_else(|| invalid("encodings", "at least one step is required"))?;
    for be in encodings {
        if be.ancillas != first.ancillas {
            return Err(Error::IncompatibleEncodings(format!(
                "ancilla widths differ: `{}` has {}, `{}` has {}",
                first.label, first.ancillas, be.label, be.ancillas
            )));
        }
        if be.system_dim != psi0.len() {
            return Err(Error::DimensionMismatch {
                context: "dilated run",
                expected: psi0.len(),
                got: be.system_dim,
            });
        }
    }
    let norm = vec::norm(psi0);
    if !(norm > 0.0) {
        return Err(invalid("psi0", "initial state is zero"));
    }
    Ok(first.ancillas)
}

/// Full state-vector emulation of the dilated circuit.
pub fn dilated_run(psi0: &[C64], encodings: &[BlockEncoding]) -> Result<DilatedRun> {
    let m = check_sequence(psi0, encodings)?;
    let n_t = encodings.len();
    let n_c = counter_qubits(n_t);
    let sys = psi0.len();
    let s = relocation(n_c, m, sys)?;
    let psi0_norm = vec::norm(psi0);
    let mut psi = vec![C64::new(0.0, 0.0); (sys << m) << n_c];
    for (dst, src) in psi.iter_mut().zip(psi0) {
        *dst = src / psi0_norm;
    }
    let mut state = DilatedState {
        psi,
        counter_qubits: n_c,
        ancillas: m,
        system_dim: sys,
        step: 0,
    };
    let block = sys << m;
    let mut records = Vec::with_capacity(n_t);
    let mut exact = psi0.to_vec();
    let mut alpha_product = 1.0;
    for (j, be) in encodings.iter().enumerate() {
        // I ⊗ U_j, skipping counter values that are still empty
        for c in 0..=j.min((1 << n_c) - 1) {
            let range = c * block..(c + 1) * block;
            if state.psi[range.clone()].iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let out = be.unitary.apply(&state.psi[range.clone()])?;
            state.psi[range].copy_from_slice(&out);
        }
        state.psi = s.apply(&state.psi)?;
        state.step = j + 1;
        alpha_product *= be.alpha;
        let target = be
            .target
            .as_ref()
            .ok_or_else(|| invalid("target", format!("encoding `{}` has no target", be.label)))?;
        exact = target.apply(&exact)?;
        records.push(StepRecord {
            step: j + 1,
            counter_norms: state.counter_norms(),
            ancilla_zero_norms: state.ancilla_zero_norms(),
            success_prob: vec::norm(state.success_block()).powi(2),
            total_norm: vec::norm(&state.psi),
        });
    }
    let success_prob = vec::norm(state.success_block()).powi(2);
    let predicted_prob = (vec::norm(&exact) / (alpha_product * psi0_norm)).powi(2);
    let estimate = vec::scaled(state.success_block(), alpha_product * psi0_norm);
    Ok(DilatedRun {
        state,
        records,
        success_prob,
        predicted_prob,
        alpha_product,
        psi0_norm,
        estimate,
        exact,
    })
}

/// The counter-0 block evolved on its own: `y ← Ξ_j y / α_j`.
///
/// For grids where the full dilated vector does not fit in memory. The
/// failure branches are summarised by the norm they remove at each step.
#[derive(Clone, Debug)]
pub struct CompressedRun {
    pub success_probs: Vec<f64>,
    pub relocated_mass: Vec<f64>,
    pub alpha_product: f64,
    pub psi0_norm: f64,
    /// Rescaled success block after each step, the last one being `ψ(T)`.
    pub estimates: Vec<Vec<C64>>,
}

impl CompressedRun {
    pub fn estimate(&self) -> &[C64] {
        self.estimates.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

pub fn compressed_run(psi0: &[C64], steps: &[StructuredOperator], alphas: &[f64]) -> Result<CompressedRun> {
    if steps.len() != alphas.len() {
        return Err(invalid("alphas", "one normalisation per step is required"));
    }
    let psi0_norm = vec::norm(psi0);
    if !(psi0_norm > 0.0) {
        return Err(invalid("psi0", "initial state is zero"));
    }
    let mut y = vec::scaled(psi0, 1.0 / psi0_norm);
    let mut prev = 1.0;
    let mut success_probs = Vec::with_capacity(steps.len());
    let mut relocated_mass = Vec::with_capacity(steps.len());
    let mut alpha_product = 1.0;
    let mut estimates = Vec::with_capacity(steps.len());
    for (op, &alpha) in steps.iter().zip(alphas) {
        y = vec::scaled(&op.apply(&y)?, 1.0 / alpha);
        alpha_product *= alpha;
        let p = vec::norm(&y).powi(2);
        relocated_mass.push(prev - p);
        success_probs.push(p);
        estimates.push(vec::scaled(&y, alpha_product * psi0_norm));
        prev = p;
    }
    Ok(CompressedRun {
        success_probs,
        relocated_mass,
        alpha_product,
        psi0_norm,
        estimates,
    })
}

/// Per-step success probabilities when each step is followed by a
/// measurement of the ancillas, with the cumulative product.
pub fn naive_profile(psi0: &[C64], encodings: &[BlockEncoding]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_sequence(psi0, encodings)?;
    let mut v = vec::scaled(psi0, 1.0 / vec::norm(psi0));
    let mut per_step = Vec::with_capacity(encodings.len());
    let mut cumulative = Vec::with_capacity(encodings.len());
    let mut acc = 1.0;
    for be in encodings {
        let out = vec::scaled(&be.apply_block(&v)?, 1.0 / be.alpha);
        let p = vec::norm(&out).powi(2);
        acc *= p;
        per_step.push(p);
        cumulative.push(acc);
        if p == 0.0 {
            break;
        }
        v = vec::scaled(&out, 1.0 / p.sqrt());
    }
    Ok((per_step, cumulative))
}

#[derive(Clone, Debug)]
pub struct UsvaResult {
    /// Normalisation `s/(1−δ)`, one ancilla.
    pub encoding: BlockEncoding,
    /// Analytic count `(α/(δ s)) ln(α/(s ε))`, never executed.
    pub queries: f64,
    /// Singular values that exceeded one after rescaling.
    pub clamped: usize,
    pub s_below_norm: bool,
    pub block_norm: f64,
}

/// Singular value amplification by direct SVD surgery on the extracted block.
///
/// The rebuilt unitary has a single ancilla; the published construction
/// adds one qubit to the input's `m`, which is kept as the bound.
pub fn usva(be: &BlockEncoding, s: f64, delta: f64, epsilon: f64) -> Result<UsvaResult> {
    if be.epsilon != 0.0 {
        return Err(invalid("encoding", "amplification needs an exact encoding"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", "must lie in (0, 1)"));
    }
    if !(s > 0.0) || !(epsilon > 0.0) {
        return Err(invalid("s", "s and epsilon must be positive"));
    }
    let a = be.extract_dense()?;
    let svd = a.clone().svd(true, true);
    let norm = svd.singular_values.max();
    let factor = (1.0 - delta) / s;
    let mut clamped = 0;
    let sv = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values.iter().map(|&x| {
            let y = x * factor;
            if y > 1.0 {
                clamped += 1;
                C64::new(1.0, 0.0)
            } else {
                C64::new(y, 0.0)
            }
        }),
    );
    let block: DMatrix<C64> = svd.u.expect("requested u") * DMatrix::from_diagonal(&sv) * svd.v_t.expect("requested v_t");
    let unitary = unitary_completion(&block)?;
    let alpha = s / (1.0 - delta);
    let mut encoding = BlockEncoding::new(unitary, alpha, 1, be.system_dim, format!("usva({})", be.label))?
        .with_claimed_bound(alpha, be.ancillas + 1);
    if let Some(t) = &be.target {
        encoding = encoding.with_target(t.clone());
    }
    Ok(UsvaResult {
        encoding,
        queries: usva_queries(be.alpha, s, delta, epsilon),
        clamped,
        s_below_norm: norm > s * (1.0 + 1e-12),
        block_norm: norm,
    })
}

/// Image table of the counter-major layout, for tests and reports.
pub fn counter_major_layout(n_c: usize, ancillas: usize, system_dim: usize) -> Result<PermutationMap> {
    PermutationMap::reorder(&[1 << n_c, 1 << ancillas, system_dim], &[0, 1, 2])
}
