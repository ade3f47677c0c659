//! Block-encodings of the lattice-Boltzmann step matrices.
//!
//! Every matrix is embedded in an eight-slot layout: system index
//! `slot · N + node`. Populations `fᵢ` occupy slots `0..Q` and the
//! concentration occupies slot 5; with fewer than five directions the
//! unused direction slots carry zero equilibrium weight and identity
//! streaming. The step matrix acts on sixteen slots (a doubling qubit on
//! top), and [`embed_state`] places `ψ = [ωf; (1−ω)φ]` inside it.

use std::f64::consts::SQRT_2;

use crate::encoding::circuits::{circuit_permutation, register_controls, Gate};
use crate::encoding::{
    be_diagonal, be_lcu, be_product, be_select, be_sum, be_tensor, be_weighted_lcu, BlockEncoding,
};
use crate::error::{invalid, Result};
use crate::lattice::{check_weight_condition, streaming_permutation, GridSpec, VelocityField, VelocitySet};
use crate::marching::{build_ai, check_omega};
use crate::ops::{PermutationMap, StructuredOperator, C64};

pub const SLOTS: usize = 8;
pub const DIRECTION_SLOTS: usize = 5;
pub const PHI_SLOT: usize = 5;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// `|row⟩⟨col|` on a `dim`-dimensional register.
fn ket_bra(dim: usize, row: usize, col: usize) -> Result<StructuredOperator> {
    StructuredOperator::embedding(StructuredOperator::identity(1), dim, dim, row, col)
}

/// `(1, 1, 0)`-encoding of `E = diag(1, 0, 0, 0)`: X on the ancilla, then X
/// on the ancilla controlled on the register being `|00⟩`.
pub fn be_e() -> Result<BlockEncoding> {
    let gates = [
        Gate::X(0),
        Gate::ControlledX {
            controls: vec![(1, false), (2, false)],
            target: 0,
        },
    ];
    let u = StructuredOperator::permutation(circuit_permutation(3, &gates)?);
    Ok(BlockEncoding::new(u, 1.0, 1, 4, "E")?
        .with_target(StructuredOperator::real_diagonal(&[1.0, 0.0, 0.0, 0.0]))
        .with_claimed_bound(1.0, 1))
}

/// `(1, 1, 0)`-encoding of `|i⟩⟨j|` on a `width`-qubit register: the ancilla
/// returns to zero only on input `|j⟩`, which is then mapped to `|i⟩`.
pub fn be_eij(i: usize, j: usize, width: usize) -> Result<BlockEncoding> {
    let dim = 1usize << width;
    if i >= dim || j >= dim {
        return Err(invalid("index", format!("({i}, {j}) outside a {width}-qubit register")));
    }
    let mut gates = vec![
        Gate::X(0),
        Gate::ControlledX {
            controls: register_controls(1, width, j),
            target: 0,
        },
    ];
    for k in 0..width {
        if ((i ^ j) >> (width - 1 - k)) & 1 == 1 {
            gates.push(Gate::X(1 + k));
        }
    }
    let u = StructuredOperator::permutation(circuit_permutation(width + 1, &gates)?);
    Ok(BlockEncoding::new(u, 1.0, 1, dim, format!("E_{i}{j}"))?
        .with_target(ket_bra(dim, i, j)?)
        .with_claimed_bound(1.0, 1))
}

/// Diagonal of `A_i`, zero for unused direction slots.
fn ai_entries(field: &VelocityField, step: usize, vs: &VelocitySet, grid: &GridSpec, i: usize) -> Result<Vec<C64>> {
    if i < vs.q() {
        let op = build_ai(field, step, vs, grid, i)?;
        match op.kind() {
            crate::ops::OperatorKind::Diagonal(d) => Ok(d.clone()),
            _ => unreachable!("A_i is diagonal"),
        }
    } else {
        Ok(vec![C64::new(0.0, 0.0); grid.nodes()])
    }
}

fn check_preconditions(tau_star: f64, field: &VelocityField, step: usize, vs: &VelocitySet, grid: &GridSpec) -> Result<()> {
    if !(tau_star >= 1.0) {
        return Err(invalid("tau_star", format!("{tau_star} < 1: the relaxation weights are not both in [0, 1]")));
    }
    if vs.q() > DIRECTION_SLOTS {
        return Err(invalid("model", "at most five directions fit the slot layout"));
    }
    check_weight_condition(vs, grid, field, step)
}

/// `L ⊗ I_N` with `L = |0⟩⟨0| ⊗ I₄ + |1⟩⟨1| ⊗ E`: controlled `U_E`.
pub fn be_ae1(grid: &GridSpec) -> Result<BlockEncoding> {
    let gates = [
        Gate::ControlledX {
            controls: vec![(1, true)],
            target: 0,
        },
        Gate::ControlledX {
            controls: vec![(1, true), (2, false), (3, false)],
            target: 0,
        },
    ];
    let n = grid.nodes();
    let u = StructuredOperator::tensor(
        StructuredOperator::permutation(circuit_permutation(4, &gates)?),
        StructuredOperator::identity(n),
    );
    let mut diag = vec![1.0; DIRECTION_SLOTS * n];
    diag.extend(vec![0.0; (SLOTS - DIRECTION_SLOTS) * n]);
    Ok(BlockEncoding::new(u, 1.0, 1, SLOTS * n, "A_e^(1)")?
        .with_target(StructuredOperator::real_diagonal(&diag))
        .with_claimed_bound(1.0, 1))
}

/// `Σᵢ E_{i5} ⊗ Aᵢ` as a five-term combination, `(5, 5, 0)`.
pub fn be_ae2(field: &VelocityField, step: usize, vs: &VelocitySet, grid: &GridSpec) -> Result<BlockEncoding> {
    let n = grid.nodes();
    let mut terms = Vec::with_capacity(DIRECTION_SLOTS);
    let mut blocks = Vec::with_capacity(DIRECTION_SLOTS);
    for i in 0..DIRECTION_SLOTS {
        let entries = ai_entries(field, step, vs, grid, i)?;
        let ai = be_diagonal(&entries, format!("A_{i}"))?;
        terms.push(be_tensor(&be_eij(i, PHI_SLOT, 3)?, &ai)?.with_label(format!("E_{i}5⊗A_{i}")));
        blocks.push((
            one(),
            StructuredOperator::embedding(
                StructuredOperator::diagonal(entries),
                SLOTS * n,
                SLOTS * n,
                i * n,
                PHI_SLOT * n,
            )?,
        ));
    }
    let be = be_lcu(&[one(); DIRECTION_SLOTS], &terms, DIRECTION_SLOTS as f64)?;
    Ok(be
        .with_label("A_e^(2)")
        .with_target(StructuredOperator::sum(blocks)?)
        .with_claimed_bound(5.0, grid.qubits() + 5))
}

/// The `E_{i5} ⊗ Aᵢ` terms on their own, for verification.
pub fn be_ei5_ai_terms(field: &VelocityField, step: usize, vs: &VelocitySet, grid: &GridSpec) -> Result<Vec<BlockEncoding>> {
    (0..DIRECTION_SLOTS)
        .map(|i| {
            let entries = ai_entries(field, step, vs, grid, i)?;
            let ai = be_diagonal(&entries, format!("A_{i}"))?.with_claimed_bound(1.0, grid.qubits() + 1);
            Ok(be_tensor(&be_eij(i, PHI_SLOT, 3)?, &ai)?
                .with_label(format!("E_{i}5⊗A_{i}"))
                .with_claimed_bound(1.0, grid.qubits() + 2))
        })
        .collect()
}

/// `A_e = (1 − 1/τ*) A_e^(1) + (1/τ*) A_e^(2)`, `(6, 6, 0)`.
pub fn be_ae(field: &VelocityField, step: usize, tau_star: f64, vs: &VelocitySet, grid: &GridSpec) -> Result<BlockEncoding> {
    check_preconditions(tau_star, field, step, vs, grid)?;
    let a1 = be_ae1(grid)?;
    let a2 = be_ae2(field, step, vs, grid)?;
    let keep = C64::new(1.0 - 1.0 / tau_star, 0.0);
    let relax = C64::new(1.0 / tau_star, 0.0);
    let be = be_sum(&a1, &a2, [keep, relax])?;
    let target = StructuredOperator::sum(vec![
        (keep, a1.target.clone().expect("set above")),
        (relax, a2.target.clone().expect("set above")),
    ])?;
    Ok(be
        .with_label("A_e")
        .with_target(target)
        .with_claimed_bound(6.0, grid.qubits() + 6))
}

/// `P_e = |0⟩⟨0| ⊗ diag(P₀..P₃) + |1⟩⟨1| ⊗ (E ⊗ P₄)`, `(1, 1, 0)`.
pub fn be_pe(vs: &VelocitySet, grid: &GridSpec) -> Result<BlockEncoding> {
    let n = grid.nodes();
    let perm = |i: usize| -> Result<StructuredOperator> {
        if i < vs.q() {
            streaming_permutation(vs, grid, i)
        } else {
            Ok(StructuredOperator::identity(n))
        }
    };
    let low = StructuredOperator::tensor(
        StructuredOperator::identity(2),
        StructuredOperator::direct_sum((0..4).map(perm).collect::<Result<_>>()?)?,
    );
    let high = StructuredOperator::tensor(be_e()?.unitary, perm(4)?);
    // select on the top slot qubit over (top, anc, rest), moved to (anc, top, rest)
    let select = StructuredOperator::direct_sum(vec![low, high])?;
    let u = StructuredOperator::reordered(select, &[2, 2, 4 * n], &[1, 0, 2])?;
    let mut blocks: Vec<StructuredOperator> = (0..DIRECTION_SLOTS).map(perm).collect::<Result<_>>()?;
    blocks.push(StructuredOperator::real_diagonal(&vec![0.0; (SLOTS - DIRECTION_SLOTS) * n]));
    Ok(BlockEncoding::new(u, 1.0, 1, SLOTS * n, "P_e")?
        .with_target(StructuredOperator::direct_sum(blocks)?)
        .with_claimed_bound(1.0, 1))
}

/// `D = 2 E (H ⊗ H)`, `(2, 1, 0)`.
pub fn be_d() -> Result<BlockEncoding> {
    let h = StructuredOperator::hadamard();
    let hh = StructuredOperator::tensor(h.clone(), h);
    let u = StructuredOperator::product(vec![
        be_e()?.unitary,
        StructuredOperator::tensor(StructuredOperator::identity(2), hh),
    ])?;
    let mut d = vec![0.0; 16];
    d[..4].copy_from_slice(&[1.0; 4]);
    Ok(BlockEncoding::new(u, 2.0, 1, 4, "D")?
        .with_target(StructuredOperator::real_dense(4, 4, &d))
        .with_claimed_bound(2.0, 1))
}

/// The 8×8 matrix with first row `(1, 1, 1, 1, 1, 0, 0, 0)`.
fn e_tilde() -> StructuredOperator {
    let mut m = vec![0.0; SLOTS * SLOTS];
    m[..DIRECTION_SLOTS].copy_from_slice(&[1.0; DIRECTION_SLOTS]);
    StructuredOperator::real_dense(SLOTS, SLOTS, &m)
}

/// `(E_I)_e = (|0⟩⟨0| ⊗ D + |0⟩⟨1| ⊗ E) ⊗ I_N`, `(3, 3, 0)`.
///
/// The two terms carry normalisations 2 and 1, so the index qubit is
/// prepared with amplitudes `(√(2/3), √(1/3))`.
pub fn be_ei(grid: &GridSpec) -> Result<BlockEncoding> {
    let t0 = be_tensor(&be_eij(0, 0, 1)?, &be_d()?)?;
    let t1 = be_tensor(&be_eij(0, 1, 1)?, &be_e()?)?;
    let e = be_weighted_lcu(&[one(), one()], &[t0, t1], Some(3.0))?;
    let id = BlockEncoding::of_unitary(StructuredOperator::identity(grid.nodes()), "I_N")?;
    Ok(be_tensor(&e, &id)?
        .with_label("(E_I)_e")
        .with_target(StructuredOperator::tensor(e_tilde(), StructuredOperator::identity(grid.nodes())))
        .with_claimed_bound(3.0, 3))
}

/// Block `(0, 8)` ↔ `(1, 0)`: moves the concentration from the lower half to slot 5.
fn relocate_phi(n: usize) -> Result<StructuredOperator> {
    let mut image: Vec<usize> = (0..2 * SLOTS * n).collect();
    for j in 0..n {
        image.swap(SLOTS * n + j, PHI_SLOT * n + j);
    }
    Ok(StructuredOperator::permutation(PermutationMap::table(image)?))
}

/// `α_M = 18√2 max{ω, 1−ω} / min{ω, 1−ω}`.
pub fn alpha_m(omega: f64) -> f64 {
    18.0 * SQRT_2 * omega.max(1.0 - omega) / omega.min(1.0 - omega)
}

/// `n_M = 3n + 18`.
pub fn ancilla_bound_m(n: usize) -> usize {
    3 * n + 18
}

/// The full construction for one step.
#[derive(Clone, Debug)]
pub struct LbmEncodings {
    pub e: BlockEncoding,
    pub ei5_ai: Vec<BlockEncoding>,
    pub e_i5: Vec<BlockEncoding>,
    pub ae1: BlockEncoding,
    pub ae2: BlockEncoding,
    pub ae: BlockEncoding,
    pub pe: BlockEncoding,
    pub pa: BlockEncoding,
    pub d: BlockEncoding,
    pub ei: BlockEncoding,
    pub me: BlockEncoding,
    pub m_omega: BlockEncoding,
    pub nodes: usize,
    pub q: usize,
}

impl LbmEncodings {
    pub fn build(
        field: &VelocityField,
        step: usize,
        tau_star: f64,
        omega: f64,
        vs: &VelocitySet,
        grid: &GridSpec,
    ) -> Result<Self> {
        check_omega(omega)?;
        let n = grid.nodes();
        let nq = grid.qubits();
        let ae = be_ae(field, step, tau_star, vs, grid)?;
        let pe = be_pe(vs, grid)?;
        let pa = be_product(&pe, &ae)?
            .with_label("P_e A_e")
            .with_claimed_bound(6.0, nq + 7);
        let ei = be_ei(grid)?;
        let half = SLOTS * n;

        // |0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ (E_I)_e, both branches at normalisation 3
        let third = be_diagonal(&vec![C64::new(1.0 / 3.0, 0.0); half], "I/3")?
            .rescaled(3.0)?
            .padded(ei.ancillas)?;
        let control = be_select(&[third, ei.clone()])?;
        let h_top = BlockEncoding::of_unitary(
            StructuredOperator::tensor(StructuredOperator::hadamard(), StructuredOperator::identity(half)),
            "H⊗I",
        )?;
        let first_half = be_tensor(&be_eij(0, 0, 1)?, &BlockEncoding::of_unitary(StructuredOperator::identity(half), "I")?)?;
        let spread = be_product(&h_top, &first_half)?.rescaled(SQRT_2)?;
        let doubled = be_tensor(&BlockEncoding::of_unitary(StructuredOperator::identity(2), "I_2")?, &pa)?;
        let me = be_product(&be_product(&control, &doubled)?, &spread)?;
        let pa_t = pa.target.clone().expect("product target");
        let me_target = StructuredOperator::sum(vec![
            (one(), StructuredOperator::tensor(ket_bra(2, 0, 0)?, pa_t.clone())),
            (
                one(),
                StructuredOperator::tensor(
                    ket_bra(2, 1, 0)?,
                    StructuredOperator::product(vec![ei.target.clone().expect("set"), pa_t])?,
                ),
            ),
        ])?;
        let me = me
            .with_label("M_e")
            .with_target(me_target)
            .with_claimed_bound(18.0 * SQRT_2, nq + 10);

        let out_alpha = omega.max(1.0 - omega);
        let mut out_w = vec![C64::new(omega / out_alpha, 0.0); half];
        out_w.extend(vec![C64::new((1.0 - omega) / out_alpha, 0.0); half]);
        let d_out = be_diagonal(&out_w, "D_ω")?.rescaled(out_alpha)?;
        let in_alpha = (1.0 / omega).max(1.0 / (1.0 - omega));
        let mut in_w = Vec::with_capacity(2 * half);
        for slot in 0..2 * SLOTS {
            let w = if slot < SLOTS && slot != PHI_SLOT { 1.0 / omega } else { 1.0 / (1.0 - omega) };
            in_w.extend(std::iter::repeat(C64::new(w / in_alpha, 0.0)).take(n));
        }
        let d_in = be_diagonal(&in_w, "D_ω⁻¹")?.rescaled(in_alpha)?;
        let r = BlockEncoding::of_unitary(relocate_phi(n)?, "R")?;
        let m_omega = be_product(&be_product(&be_product(&r, &d_out)?, &me)?, &d_in)?;
        let m_target = StructuredOperator::product(vec![
            r.target.clone().expect("unitary"),
            d_out.target.clone().expect("diagonal"),
            me.target.clone().expect("set"),
            d_in.target.clone().expect("diagonal"),
        ])?;
        let m_omega = m_omega
            .with_label("M_ω")
            .with_target(m_target)
            .with_claimed_bound(alpha_m(omega), ancilla_bound_m(nq));

        Ok(LbmEncodings {
            e: be_e()?,
            ei5_ai: be_ei5_ai_terms(field, step, vs, grid)?,
            e_i5: (0..DIRECTION_SLOTS).map(|i| be_eij(i, PHI_SLOT, 3)).collect::<Result<_>>()?,
            ae1: be_ae1(grid)?,
            ae2: be_ae2(field, step, vs, grid)?,
            ae,
            pe,
            pa,
            d: be_d()?,
            ei,
            me,
            m_omega,
            nodes: n,
            q: vs.q(),
        })
    }

    /// Every encoding in construction order.
    pub fn all(&self) -> Vec<&BlockEncoding> {
        let mut out = vec![&self.e];
        out.extend(self.e_i5.iter());
        out.extend(self.ei5_ai.iter());
        out.extend([&self.ae1, &self.ae2, &self.ae, &self.pe, &self.pa, &self.d, &self.ei, &self.me, &self.m_omega]);
        out
    }
}

/// Slot holding marching block `k` (`k < Q` populations, `k = Q` concentration).
pub fn slot_of_block(k: usize, q: usize) -> usize {
    if k < q {
        k
    } else {
        PHI_SLOT
    }
}

/// `ψ` of length `(Q+1)N` placed in the sixteen-slot system.
pub fn embed_state(psi: &[C64], q: usize, n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); 2 * SLOTS * n];
    for k in 0..=q {
        let s = slot_of_block(k, q);
        out[s * n..(s + 1) * n].copy_from_slice(&psi[k * n..(k + 1) * n]);
    }
    out
}

pub fn restrict_state(v: &[C64], q: usize, n: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity((q + 1) * n);
    for k in 0..=q {
        let s = slot_of_block(k, q);
        out.extend_from_slice(&v[s * n..(s + 1) * n]);
    }
    out
}
