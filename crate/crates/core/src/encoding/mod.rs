//! Block-encodings and their algebra.
//!
//! A [`BlockEncoding`] holds a unitary `U` on `2^m · system_dim`
//! dimensions. Ancillas are the most significant digits of the basis index
//! (`index = ancilla · system_dim + s`), so `Π = ⟨0^m| ⊗ I` keeps the first
//! `system_dim` entries and the encoded matrix is `α · Π U Π†`.

pub mod circuits;
pub mod lbm;
mod prep;

pub use prep::StatePrepPair;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::ops::{
    unitary_completion, vec, verify_unitary_with, PermutationMap, StructuredOperator, C64,
};

/// Total dimension up to which checks run over the full basis.
pub const EXHAUSTIVE_LIMIT: usize = 1 << 11;
/// Random probes used above [`EXHAUSTIVE_LIMIT`].
pub const PROBES: usize = 64;
/// Probe count times total dimension targeted by [`BlockEncoding::check`].
pub const PROBE_BUDGET: usize = 1 << 21;

#[derive(Clone, Debug)]
pub struct BlockEncoding {
    pub unitary: StructuredOperator,
    pub alpha: f64,
    pub ancillas: usize,
    pub epsilon: f64,
    pub system_dim: usize,
    pub label: String,
    /// The matrix this encoding claims to represent, if known.
    pub target: Option<StructuredOperator>,
    /// Published `(α, m)` upper bounds, recorded for reports.
    pub claimed_bound: Option<(f64, usize)>,
}

#[derive(Clone, Debug)]
pub struct EncodingCheck {
    pub unitarity_defect: f64,
    pub block_error: f64,
    pub exhaustive: bool,
}

impl EncodingCheck {
    pub fn passes(&self, tol: f64, epsilon: f64) -> bool {
        self.unitarity_defect <= tol && self.block_error <= epsilon + tol
    }
}

impl BlockEncoding {
    pub fn new(
        unitary: StructuredOperator,
        alpha: f64,
        ancillas: usize,
        system_dim: usize,
        label: impl Into<String>,
    ) -> Result<Self> {
        let total = system_dim << ancillas;
        if unitary.rows() != total || unitary.cols() != total {
            return Err(Error::DimensionMismatch {
                context: "block-encoding unitary",
                expected: total,
                got: unitary.cols(),
            });
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(invalid("alpha", format!("{alpha} must be positive")));
        }
        Ok(BlockEncoding {
            unitary,
            alpha,
            ancillas,
            epsilon: 0.0,
            system_dim,
            label: label.into(),
            target: None,
            claimed_bound: None,
        })
    }

    /// `(1, 0, 0)`-encoding of a unitary.
    pub fn of_unitary(u: StructuredOperator, label: impl Into<String>) -> Result<Self> {
        let dim = u.rows();
        Ok(BlockEncoding::new(u.clone(), 1.0, 0, dim, label)?.with_target(u))
    }

    pub fn with_target(mut self, target: StructuredOperator) -> Self {
        self.target = Some(target);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_claimed_bound(mut self, alpha: f64, ancillas: usize) -> Self {
        self.claimed_bound = Some((alpha, ancillas));
        self
    }

    /// Same unitary read with normalisation `factor · α`, encoding `factor · A`.
    pub fn rescaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return Err(invalid("factor", "must be positive"));
        }
        self.alpha *= factor;
        self.epsilon *= factor;
        self.target = self.target.map(|t| t.scaled(C64::new(factor, 0.0)));
        Ok(self)
    }

    pub fn total_dim(&self) -> usize {
        self.unitary.rows()
    }

    /// `Π = ⟨0^m| ⊗ I` as a `system_dim × total_dim` operator.
    fn projector(&self) -> Result<StructuredOperator> {
        StructuredOperator::embedding(
            StructuredOperator::identity(self.system_dim),
            self.system_dim,
            self.total_dim(),
            0,
            0,
        )
    }

    /// Lazy `α Π U Π†`.
    pub fn extract(&self) -> Result<StructuredOperator> {
        let pi = self.projector()?;
        Ok(StructuredOperator::product(vec![pi.clone(), self.unitary.clone(), pi.adjoint()])?
            .scaled(C64::new(self.alpha, 0.0)))
    }

    pub fn extract_dense(&self) -> Result<DMatrix<C64>> {
        self.extract()?.materialize()
    }

    /// `α Π U (|0^m⟩ ⊗ v)`.
    pub fn apply_block(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.system_dim {
            return Err(Error::DimensionMismatch {
                context: "block application",
                expected: self.system_dim,
                got: v.len(),
            });
        }
        let mut full = vec![C64::new(0.0, 0.0); self.total_dim()];
        full[..self.system_dim].copy_from_slice(v);
        let out = self.unitary.apply(&full)?;
        Ok(out[..self.system_dim].iter().map(|z| z * self.alpha).collect())
    }

    /// Unitarity defect and block error against `target`. Large encodings
    /// get fewer random probes, at least four.
    pub fn check(&self) -> Result<EncodingCheck> {
        let probes = (PROBE_BUDGET / self.total_dim()).clamp(4, PROBES);
        self.check_with(EXHAUSTIVE_LIMIT, probes, 0xb10c)
    }

    pub fn check_with(&self, exhaustive_limit: usize, probes: usize, seed: u64) -> Result<EncodingCheck> {
        let target = self
            .target
            .as_ref()
            .ok_or_else(|| invalid("target", format!("encoding `{}` has no target", self.label)))?;
        if target.rows() != self.system_dim || target.cols() != self.system_dim {
            return Err(Error::DimensionMismatch {
                context: "encoding target",
                expected: self.system_dim,
                got: target.cols(),
            });
        }
        let unitarity = verify_unitary_with(&self.unitary, 0.0, exhaustive_limit, probes, seed);
        let exhaustive = self.total_dim() <= exhaustive_limit;
        let block_error = if exhaustive {
            // Frobenius norm bounds the spectral norm from above
            let mut worst = 0.0;
            for j in 0..self.system_dim {
                let e = vec::basis(self.system_dim, j);
                let d = vec::dist(&self.apply_block(&e)?, &target.apply(&e)?);
                worst += d * d;
            }
            f64::sqrt(worst)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut worst: f64 = 0.0;
            for _ in 0..probes {
                let v = crate::ops::random_unit_vector(self.system_dim, &mut rng);
                worst = worst.max(vec::dist(&self.apply_block(&v)?, &target.apply(&v)?));
            }
            worst
        };
        Ok(EncodingCheck {
            unitarity_defect: unitarity.defect,
            block_error,
            exhaustive,
        })
    }

    /// Adds idle ancillas above the existing ones.
    pub fn padded(&self, ancillas: usize) -> Result<Self> {
        if ancillas < self.ancillas {
            return Err(invalid("ancillas", "cannot remove ancillas"));
        }
        if ancillas == self.ancillas {
            return Ok(self.clone());
        }
        let extra = 1usize << (ancillas - self.ancillas);
        Ok(BlockEncoding {
            unitary: StructuredOperator::tensor(StructuredOperator::identity(extra), self.unitary.clone()),
            ancillas,
            ..self.clone()
        })
    }
}

/// Rotation encoding of a diagonal with `|aⱼ| ≤ 1`: one ancilla,
/// `U = [[diag(a), diag(s)], [diag(s), −diag(ā)]]`, `s = √(1 − |a|²)`.
pub fn be_diagonal(entries: &[C64], label: impl Into<String>) -> Result<BlockEncoding> {
    let n = entries.len();
    for (j, a) in entries.iter().enumerate() {
        if a.norm() > 1.0 + 1e-12 {
            return Err(Error::MaxNormExceeded {
                value: a.norm(),
                row: j,
                col: j,
            });
        }
    }
    let s: Vec<C64> = entries
        .iter()
        .map(|a| C64::new((1.0 - a.norm_sqr()).max(0.0).sqrt(), 0.0))
        .collect();
    let neg_conj: Vec<C64> = entries.iter().map(|a| -a.conj()).collect();
    let unit = |r: usize, c: usize| {
        let mut m = [0.0; 4];
        m[r * 2 + c] = 1.0;
        StructuredOperator::real_dense(2, 2, &m)
    };
    let u = StructuredOperator::sum(vec![
        (C64::new(1.0, 0.0), StructuredOperator::tensor(unit(0, 0), StructuredOperator::diagonal(entries.to_vec()))),
        (C64::new(1.0, 0.0), StructuredOperator::tensor(unit(0, 1), StructuredOperator::diagonal(s.clone()))),
        (C64::new(1.0, 0.0), StructuredOperator::tensor(unit(1, 0), StructuredOperator::diagonal(s))),
        (C64::new(1.0, 0.0), StructuredOperator::tensor(unit(1, 1), StructuredOperator::diagonal(neg_conj))),
    ])?;
    Ok(BlockEncoding::new(u, 1.0, 1, n, label)?.with_target(StructuredOperator::diagonal(entries.to_vec())))
}

/// Encoding of a matrix with `‖A‖_max ≤ 1`: diagonal matrices use the
/// one-ancilla rotation; other `s`-sparse matrices use the unitary
/// completion of `A/s` (also one ancilla, `α = s`).
pub fn be_sparse(a: &DMatrix<C64>, label: impl Into<String>) -> Result<BlockEncoding> {
    if !a.is_square() {
        return Err(invalid("A", "matrix must be square"));
    }
    let n = a.nrows();
    let mut sparsity = 0usize;
    for r in 0..n {
        for c in 0..n {
            let v = a[(r, c)].norm();
            if v > 1.0 + 1e-12 {
                return Err(Error::MaxNormExceeded { value: v, row: r, col: c });
            }
        }
        let row_nnz = (0..n).filter(|&c| a[(r, c)].norm() > 0.0).count();
        let col_nnz = (0..n).filter(|&c| a[(c, r)].norm() > 0.0).count();
        sparsity = sparsity.max(row_nnz).max(col_nnz);
    }
    let label = label.into();
    let diagonal = (0..n).all(|r| (0..n).all(|c| r == c || a[(r, c)].norm() == 0.0));
    if diagonal {
        let entries: Vec<C64> = (0..n).map(|j| a[(j, j)]).collect();
        return be_diagonal(&entries, label);
    }
    let s = sparsity.max(1) as f64;
    let u = unitary_completion(&(a / C64::new(s, 0.0)))?;
    Ok(BlockEncoding::new(u, s, 1, n, label)?.with_target(StructuredOperator::dense(a.clone())))
}

fn combined_epsilon(a: &BlockEncoding, b: &BlockEncoding) -> f64 {
    a.alpha * b.epsilon + b.alpha * a.epsilon
}

fn require_system(a: &BlockEncoding, b: &BlockEncoding, what: &str) -> Result<()> {
    if a.system_dim != b.system_dim {
        return Err(Error::IncompatibleEncodings(format!(
            "{what}: system dimensions {} and {} differ",
            a.system_dim, b.system_dim
        )));
    }
    Ok(())
}

/// Encoding of `A₁·A₂`, ancilla order `(a₁, a₂, s)`.
pub fn be_product(first: &BlockEncoding, second: &BlockEncoding) -> Result<BlockEncoding> {
    require_system(first, second, "product")?;
    let (d1, d2, s) = (1usize << first.ancillas, 1usize << second.ancillas, first.system_dim);
    let u2 = StructuredOperator::tensor(StructuredOperator::identity(d1), second.unitary.clone());
    let u1 = StructuredOperator::reordered(
        StructuredOperator::tensor(StructuredOperator::identity(d2), first.unitary.clone()),
        &[d1, d2, s],
        &[1, 0, 2],
    )?;
    let target = match (&first.target, &second.target) {
        (Some(a), Some(b)) => Some(StructuredOperator::product(vec![a.clone(), b.clone()])?),
        _ => None,
    };
    Ok(BlockEncoding {
        unitary: StructuredOperator::product(vec![u1, u2])?,
        alpha: first.alpha * second.alpha,
        ancillas: first.ancillas + second.ancillas,
        epsilon: combined_epsilon(first, second),
        system_dim: s,
        label: format!("({})·({})", first.label, second.label),
        target,
        claimed_bound: None,
    })
}

/// Encoding of `A₁ ⊗ A₂`, ancilla order `(a₁, a₂, s₁, s₂)`.
pub fn be_tensor(left: &BlockEncoding, right: &BlockEncoding) -> Result<BlockEncoding> {
    let (d1, d2) = (1usize << left.ancillas, 1usize << right.ancillas);
    let (s1, s2) = (left.system_dim, right.system_dim);
    let u = StructuredOperator::reordered(
        StructuredOperator::tensor(left.unitary.clone(), right.unitary.clone()),
        &[d1, d2, s1, s2],
        &[0, 2, 1, 3],
    )?;
    let target = match (&left.target, &right.target) {
        (Some(a), Some(b)) => Some(StructuredOperator::tensor(a.clone(), b.clone())),
        _ => None,
    };
    Ok(BlockEncoding {
        unitary: u,
        alpha: left.alpha * right.alpha,
        ancillas: left.ancillas + right.ancillas,
        epsilon: combined_epsilon(left, right),
        system_dim: s1 * s2,
        label: format!("({})⊗({})", left.label, right.label),
        target,
        claimed_bound: None,
    })
}

/// Select-prepare-unselect with coefficients `weights` on the normalised
/// blocks `Aⱼ/αⱼ`; the result has normalisation `prep.beta`.
fn lcu_core(weights_target: &[C64], encs: &[BlockEncoding], prep: &StatePrepPair) -> Result<BlockEncoding> {
    let first = encs
        .first()
        .ok_or_else(|| invalid("encodings", "empty combination"))?;
    for e in encs {
        require_system(first, e, "combination")?;
    }
    let a = encs.iter().map(|e| e.ancillas).max().unwrap_or(0);
    let padded: Vec<BlockEncoding> = encs.iter().map(|e| e.padded(a)).collect::<Result<_>>()?;
    let slots = 1usize << prep.b;
    let inner = first.system_dim << a;
    let mut blocks: Vec<StructuredOperator> = padded.iter().map(|e| e.unitary.clone()).collect();
    while blocks.len() < slots {
        blocks.push(StructuredOperator::identity(inner));
    }
    let select = StructuredOperator::direct_sum(blocks)?;
    let pr = StructuredOperator::tensor(StructuredOperator::dense(prep.p_r.clone()), StructuredOperator::identity(inner));
    let pl_dag = StructuredOperator::tensor(
        StructuredOperator::dense(prep.p_l.adjoint()),
        StructuredOperator::identity(inner),
    );
    let u = StructuredOperator::product(vec![pl_dag, select, pr])?;
    let target = if encs.iter().all(|e| e.target.is_some()) {
        Some(StructuredOperator::sum(
            weights_target
                .iter()
                .zip(encs)
                .map(|(w, e)| (*w, e.target.clone().expect("checked")))
                .collect(),
        )?)
    } else {
        None
    };
    let max_eps = encs.iter().map(|e| e.epsilon / e.alpha).fold(0.0, f64::max);
    Ok(BlockEncoding {
        unitary: u,
        alpha: prep.beta,
        ancillas: a + prep.b,
        epsilon: prep.delta + prep.beta * max_eps,
        system_dim: first.system_dim,
        label: String::new(),
        target,
        claimed_bound: None,
    })
}

/// Linear combination `Σ yⱼ Aⱼ` of encodings sharing `α`, prepared with
/// normalisation `beta ≥ ‖y‖₁`; the result is an `(αβ, a + b)` encoding.
pub fn be_lcu(coeffs: &[C64], encs: &[BlockEncoding], beta: f64) -> Result<BlockEncoding> {
    if coeffs.len() != encs.len() {
        return Err(invalid("coeffs", "one coefficient per encoding required"));
    }
    let alpha = encs
        .first()
        .ok_or_else(|| invalid("encodings", "empty combination"))?
        .alpha;
    if encs.iter().any(|e| (e.alpha - alpha).abs() > 1e-12 * alpha) {
        return Err(Error::IncompatibleEncodings(
            "linear combination operands must share the normalisation α".into(),
        ));
    }
    let scaled: Vec<C64> = coeffs.iter().map(|y| y * alpha).collect();
    let prep = StatePrepPair::new(&scaled, alpha * beta)?;
    let mut out = lcu_core(coeffs, encs, &prep)?;
    let eps = encs.iter().map(|e| e.epsilon).fold(0.0, f64::max);
    out.epsilon = prep.delta + alpha * beta * eps;
    out.label = format!("lcu[{}]", encs.iter().map(|e| e.label.as_str()).collect::<Vec<_>>().join(", "));
    Ok(out)
}

/// Combination `Σ yⱼ Aⱼ` of encodings with arbitrary normalisations:
/// coefficients `yⱼαⱼ` on the normalised blocks, `β = Σ |yⱼ| αⱼ` unless given.
pub fn be_weighted_lcu(coeffs: &[C64], encs: &[BlockEncoding], beta: Option<f64>) -> Result<BlockEncoding> {
    if coeffs.len() != encs.len() {
        return Err(invalid("coeffs", "one coefficient per encoding required"));
    }
    let scaled: Vec<C64> = coeffs.iter().zip(encs).map(|(y, e)| y * e.alpha).collect();
    let beta = beta.unwrap_or_else(|| scaled.iter().map(|z| z.norm()).sum());
    let prep = StatePrepPair::new(&scaled, beta)?;
    let mut out = lcu_core(coeffs, encs, &prep)?;
    out.label = format!("wlcu[{}]", encs.iter().map(|e| e.label.as_str()).collect::<Vec<_>>().join(", "));
    Ok(out)
}

/// `c₁A₁ + c₂A₂` for `|cⱼ| ≤ 1` with the constants `(α₁ + α₂, m₁ + m₂, α₁ε₂ + α₂ε₁)`.
/// One index qubit is needed, so the ancilla count is
/// `max(m₁ + m₂, 1 + max(m₁, m₂))`.
pub fn be_sum(first: &BlockEncoding, second: &BlockEncoding, coeffs: [C64; 2]) -> Result<BlockEncoding> {
    require_system(first, second, "sum")?;
    if coeffs.iter().any(|c| c.norm() > 1.0 + 1e-12) {
        return Err(invalid("coeffs", "sum coefficients must satisfy |c| <= 1"));
    }
    let beta = first.alpha + second.alpha;
    let mut out = be_weighted_lcu(&coeffs, &[first.clone(), second.clone()], Some(beta))?;
    let m = (first.ancillas + second.ancillas).max(1 + first.ancillas.max(second.ancillas));
    out = out.padded(m)?;
    out.epsilon = combined_epsilon(first, second);
    out.label = format!("{}·({}) + {}·({})", fmt_c(coeffs[0]), first.label, fmt_c(coeffs[1]), second.label);
    Ok(out)
}

fn fmt_c(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{z}")
    }
}

/// `Σ_k |k⟩⟨k| ⊗ U_k` over `(k, a, s)`, reordered to ancilla-first `(a, k, s)`.
/// The system of the result is `(k, s)`.
pub fn be_select(encs: &[BlockEncoding]) -> Result<BlockEncoding> {
    let first = encs.first().ok_or_else(|| invalid("encodings", "empty select"))?;
    for e in encs {
        require_system(first, e, "select")?;
        if (e.alpha - first.alpha).abs() > 1e-12 * first.alpha || e.ancillas != first.ancillas {
            return Err(Error::IncompatibleEncodings(
                "select operands must share (α, m)".into(),
            ));
        }
    }
    let k = encs.len();
    let a = 1usize << first.ancillas;
    let s = first.system_dim;
    let select = StructuredOperator::direct_sum(encs.iter().map(|e| e.unitary.clone()).collect())?;
    // select acts on (k, a, s); conjugate so it acts on (a, k, s)
    let u = StructuredOperator::reordered(select, &[a, k, s], &[1, 0, 2])?;
    let target = if encs.iter().all(|e| e.target.is_some()) {
        Some(StructuredOperator::direct_sum(
            encs.iter().map(|e| e.target.clone().expect("checked")).collect(),
        )?)
    } else {
        None
    };
    Ok(BlockEncoding {
        unitary: u,
        alpha: first.alpha,
        ancillas: first.ancillas,
        epsilon: encs.iter().map(|e| e.epsilon).fold(0.0, f64::max),
        system_dim: k * s,
        label: format!("select[{}]", encs.len()),
        target,
        claimed_bound: None,
    })
}

/// Encoding of the zero matrix: a single flipped ancilla.
pub fn be_zero(system_dim: usize, alpha: f64, ancillas: usize) -> Result<BlockEncoding> {
    if ancillas == 0 {
        return Err(invalid("ancillas", "the zero matrix needs at least one ancilla"));
    }
    let flip = StructuredOperator::permutation(PermutationMap::cyclic(2, 1));
    let u = StructuredOperator::tensor(flip, StructuredOperator::identity(system_dim << (ancillas - 1)));
    let zero = StructuredOperator::real_diagonal(&vec![0.0; system_dim]);
    Ok(BlockEncoding::new(u, alpha, ancillas, system_dim, "0")?.with_target(zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
        DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    /// Encoding of a random contraction through unitary completion.
    fn random_encoding(n: usize, alpha: f64, rng: &mut ChaCha8Rng) -> (BlockEncoding, DMatrix<C64>) {
        let m = random_matrix(n, rng);
        let norm = m.singular_values().max();
        let a = &m * c(alpha / norm * 0.9);
        let u = unitary_completion(&(&a / c(alpha))).unwrap();
        let be = BlockEncoding::new(u, alpha, 1, n, "rand").unwrap().with_target(StructuredOperator::dense(a.clone()));
        (be, a)
    }

    fn assert_close(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) {
        assert!((a - b).norm() <= tol, "difference {}", (a - b).norm());
    }

    #[test]
    fn identity_extracts_identity() {
        let be = BlockEncoding::of_unitary(StructuredOperator::identity(4), "I").unwrap();
        assert_close(&be.extract_dense().unwrap(), &DMatrix::identity(4, 4), 0.0);
    }

    #[test]
    fn sparse_examples() {
        let third = DMatrix::from_diagonal_element(4, 4, c(1.0 / 3.0));
        let be = be_sparse(&third, "A0").unwrap();
        assert_eq!((be.alpha, be.ancillas), (1.0, 1));
        assert_close(&be.extract_dense().unwrap(), &third, 1e-15);
        let pm = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]));
        assert_close(&be_sparse(&pm, "Z").unwrap().extract_dense().unwrap(), &pm, 1e-15);
        let zero = DMatrix::zeros(2, 2);
        assert_close(&be_sparse(&zero, "0").unwrap().extract_dense().unwrap(), &zero, 1e-15);
        assert!(matches!(
            be_sparse(&DMatrix::from_diagonal_element(2, 2, c(1.5)), "big"),
            Err(Error::MaxNormExceeded { .. })
        ));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d: Vec<C64> = (0..8).map(|_| C64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..6.0))).collect();
        let dm = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
        let be = be_sparse(&dm, "D").unwrap();
        assert_close(&be.extract_dense().unwrap(), &dm, 1e-12);
        assert!(be.check().unwrap().passes(1e-12, 0.0));

        let tri = DMatrix::from_fn(4, 4, |r, cc| if r.abs_diff(cc) <= 1 { c(0.5) } else { c(0.0) });
        let be = be_sparse(&tri, "tri").unwrap();
        assert_eq!(be.alpha, 3.0);
        assert_close(&be.extract_dense().unwrap(), &tri, 1e-12);
    }

    #[test]
    fn product_of_permutations() {
        let p1 = StructuredOperator::cyclic_shift(4, 1);
        let p2 = StructuredOperator::permutation(PermutationMap::table(vec![2, 0, 3, 1]).unwrap());
        let e1 = BlockEncoding::of_unitary(p1.clone(), "p1").unwrap().padded(1).unwrap();
        let e2 = BlockEncoding::of_unitary(p2.clone(), "p2").unwrap().padded(1).unwrap();
        let prod = be_product(&e1, &e2).unwrap();
        assert_eq!((prod.alpha, prod.ancillas, prod.epsilon), (1.0, 2, 0.0));
        let expected = p1.materialize().unwrap() * p2.materialize().unwrap();
        assert_close(&prod.extract_dense().unwrap(), &expected, 1e-15);
        assert!(prod.check().unwrap().passes(1e-12, 0.0));
    }

    #[test]
    fn lemma_constants_on_random_operands() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let (a1, m1) = random_encoding(4, rng.gen_range(1.0..3.0), &mut rng);
            let (a2, m2) = random_encoding(4, rng.gen_range(1.0..3.0), &mut rng);
            let a1 = a1.padded(rng.gen_range(1..3)).unwrap();
            let mut a2 = a2.padded(rng.gen_range(1..3)).unwrap();
            a2.epsilon = 0.0;

            let p = be_product(&a1, &a2).unwrap();
            assert_eq!(p.alpha, a1.alpha * a2.alpha);
            assert_eq!(p.ancillas, a1.ancillas + a2.ancillas);
            assert_close(&p.extract_dense().unwrap(), &(&m1 * &m2), 1e-12);

            let t = be_tensor(&a1, &a2).unwrap();
            assert_eq!(t.alpha, a1.alpha * a2.alpha);
            assert_eq!(t.ancillas, a1.ancillas + a2.ancillas);
            assert_close(&t.extract_dense().unwrap(), &m1.kronecker(&m2), 1e-12);

            let coeffs = [c(rng.gen_range(-1.0..1.0)), C64::new(0.0, rng.gen_range(-1.0..1.0))];
            let s = be_sum(&a1, &a2, coeffs).unwrap();
            assert_eq!(s.alpha, a1.alpha + a2.alpha);
            assert_eq!(s.ancillas, a1.ancillas + a2.ancillas);
            assert_close(&s.extract_dense().unwrap(), &(&m1 * coeffs[0] + &m2 * coeffs[1]), 1e-12);
            for be in [&p, &t, &s] {
                let chk = be.check().unwrap();
                assert!(chk.passes(1e-10, 0.0), "{} {:?}", be.label, chk);
            }
        }
    }

    #[test]
    fn adjoint_encoding_keeps_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (be, m) = random_encoding(4, 2.0, &mut rng);
        let adj = BlockEncoding::new(be.unitary.adjoint(), be.alpha, be.ancillas, 4, "adj").unwrap();
        assert_close(&adj.extract_dense().unwrap(), &m.adjoint(), 1e-12);
    }

    #[test]
    fn averaging_lcu_has_unit_normalisation() {
        let i2 = BlockEncoding::of_unitary(StructuredOperator::identity(2), "I").unwrap();
        let x = BlockEncoding::of_unitary(StructuredOperator::real_dense(2, 2, &[0.0, 1.0, 1.0, 0.0]), "X").unwrap();
        let avg = be_lcu(&[c(0.5), c(0.5)], &[i2.clone(), x], 1.0).unwrap();
        assert!((avg.alpha - 1.0).abs() < 1e-15);
        let expected = DMatrix::from_element(2, 2, c(0.5));
        assert_close(&avg.extract_dense().unwrap(), &expected, 1e-14);

        let twice = be_lcu(&[c(1.0), c(1.0)], &[i2.clone(), i2.clone()], 2.0).unwrap();
        assert_eq!(twice.alpha, 2.0);
        assert_close(&twice.extract_dense().unwrap(), &(DMatrix::identity(2, 2) * c(2.0)), 1e-14);
    }

    #[test]
    fn lcu_matches_dense_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let (e1, m1) = random_encoding(8, 1.5, &mut rng);
            let (e2, m2) = random_encoding(8, 1.5, &mut rng);
            let y = [c(rng.gen_range(-2.0..2.0)), C64::new(0.3, rng.gen_range(-1.0..1.0))];
            let beta = y[0].norm() + y[1].norm() + rng.gen_range(0.0..0.5);
            let be = be_lcu(&y, &[e1, e2], beta).unwrap();
            assert!((be.alpha - 1.5 * beta).abs() < 1e-12);
            assert_close(&be.extract_dense().unwrap(), &(&m1 * y[0] + &m2 * y[1]), 1e-12);
            assert!(be.check().unwrap().passes(1e-10, 0.0));
        }
        let (e1, _) = random_encoding(2, 1.0, &mut rng);
        let (e2, _) = random_encoding(2, 2.0, &mut rng);
        assert!(matches!(be_lcu(&[c(1.0), c(1.0)], &[e1, e2], 2.0), Err(Error::IncompatibleEncodings(_))));
    }

    #[test]
    fn select_is_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (e1, m1) = random_encoding(2, 2.0, &mut rng);
        let (e2, m2) = random_encoding(2, 2.0, &mut rng);
        let sel = be_select(&[e1, e2]).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected.view_mut((0, 0), (2, 2)).copy_from(&m1);
        expected.view_mut((2, 2), (2, 2)).copy_from(&m2);
        assert_close(&sel.extract_dense().unwrap(), &expected, 1e-12);
        assert!(sel.check().unwrap().passes(1e-10, 0.0));
    }

    #[test]
    fn zero_encoding() {
        let z = be_zero(4, 3.0, 2).unwrap();
        assert!(z.extract_dense().unwrap().norm() == 0.0);
        assert!(z.check().unwrap().passes(1e-14, 0.0));
    }

    #[test]
    fn sampled_check_agrees_with_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let (be, _) = random_encoding(16, 2.0, &mut rng);
        let exhaustive = be.check().unwrap();
        let sampled = be.check_with(4, 16, 1).unwrap();
        assert!(exhaustive.exhaustive && !sampled.exhaustive);
        assert!(exhaustive.passes(1e-10, 0.0) && sampled.passes(1e-10, 0.0));
        let mut wrong = be.clone();
        wrong.alpha *= 1.1;
        assert!(!wrong.check_with(4, 16, 1).unwrap().passes(1e-10, 0.0));
    }
}
