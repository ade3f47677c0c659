//! Lazily composed linear operators.
//!
//! Every matrix that appears in the marching scheme, the block-encoding
//! circuits and the global linear system is a [`StructuredOperator`]: a tree
//! of permutations, diagonals, small dense blocks, tensor products, products,
//! sums, direct sums and embeddings. Operators are immutable and cheap to
//! clone; application never materializes the tree.

mod completion;
mod norm;
mod perm;

pub use completion::{householder_completion, unitary_completion};
pub use norm::{
    random_unit_vector, spectral_norm, spectral_norm_with, verify_unitary, verify_unitary_with, NormMethod,
    NormOptions, OperatorNormReport, UnitarityCheck,
};
pub use perm::PermutationMap;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dimension above which exhaustive checks switch to sampled ones.
pub const DENSE_THRESHOLD: usize = 4096;
/// Maximum number of entries `materialize` will produce.
pub const MATERIALIZE_CAP: usize = 1 << 26;

#[derive(Clone)]
pub struct StructuredOperator(Arc<Node>);

struct Node {
    rows: usize,
    cols: usize,
    kind: OperatorKind,
}

/// The variants an operator tree is built from.
pub enum OperatorKind {
    Identity,
    Permutation(PermutationMap),
    Diagonal(Vec<C64>),
    Dense(DMatrix<C64>),
    Tensor(StructuredOperator, StructuredOperator),
    /// Factors applied right to left: `[A, B]` is `A·B`.
    Product(Vec<StructuredOperator>),
    Sum(Vec<(C64, StructuredOperator)>),
    DirectSum(Vec<StructuredOperator>),
    Embedding {
        inner: StructuredOperator,
        row_offset: usize,
        col_offset: usize,
    },
}

impl fmt::Debug for StructuredOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind() {
            OperatorKind::Identity => "Identity",
            OperatorKind::Permutation(_) => "Permutation",
            OperatorKind::Diagonal(_) => "Diagonal",
            OperatorKind::Dense(_) => "Dense",
            OperatorKind::Tensor(..) => "Tensor",
            OperatorKind::Product(_) => "Product",
            OperatorKind::Sum(_) => "Sum",
            OperatorKind::DirectSum(_) => "DirectSum",
            OperatorKind::Embedding { .. } => "Embedding",
        };
        write!(f, "{}({}x{})", name, self.rows(), self.cols())
    }
}

fn check(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}

impl StructuredOperator {
    fn from_parts(rows: usize, cols: usize, kind: OperatorKind) -> Self {
        StructuredOperator(Arc::new(Node { rows, cols, kind }))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(dim, dim, OperatorKind::Identity)
    }

    pub fn permutation(map: PermutationMap) -> Self {
        let n = map.len();
        Self::from_parts(n, n, OperatorKind::Permutation(map))
    }

    /// `e_i -> e_{(i + shift) mod n}`; negative shifts wrap.
    pub fn cyclic_shift(n: usize, shift: i64) -> Self {
        Self::permutation(PermutationMap::cyclic(n, shift))
    }

    pub fn diagonal(entries: Vec<C64>) -> Self {
        let n = entries.len();
        Self::from_parts(n, n, OperatorKind::Diagonal(entries))
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        Self::diagonal(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dense(matrix: DMatrix<C64>) -> Self {
        Self::from_parts(matrix.nrows(), matrix.ncols(), OperatorKind::Dense(matrix))
    }

    /// Dense operator from row-major real entries.
    pub fn real_dense(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "real_dense entry count");
        Self::dense(DMatrix::from_fn(rows, cols, |r, c| {
            C64::new(entries[r * cols + c], 0.0)
        }))
    }

    /// 2x2 Hadamard.
    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::real_dense(2, 2, &[h, h, h, -h])
    }

    /// `left ⊗ right`, with `right` on the low-order (fast) index.
    pub fn tensor(left: StructuredOperator, right: StructuredOperator) -> Self {
        let rows = left.rows() * right.rows();
        let cols = left.cols() * right.cols();
        Self::from_parts(rows, cols, OperatorKind::Tensor(left, right))
    }

    /// Tensor product of a sequence, first factor most significant.
    pub fn tensor_all(factors: Vec<StructuredOperator>) -> Result<Self> {
        let mut iter = factors.into_iter();
        let first = iter.next().ok_or_else(|| crate::error::invalid("factors", "empty tensor product"))?;
        Ok(iter.fold(first, StructuredOperator::tensor))
    }

    /// `factors[0] · factors[1] · ... ` (the last factor acts first).
    pub fn product(factors: Vec<StructuredOperator>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| crate::error::invalid("factors", "empty product"))?;
        for pair in factors.windows(2) {
            check("product", pair[0].cols(), pair[1].rows())?;
        }
        let rows = first.rows();
        let cols = factors.last().map(|f| f.cols()).unwrap_or(rows);
        if factors.len() == 1 {
            return Ok(factors.into_iter().next().unwrap());
        }
        Ok(Self::from_parts(rows, cols, OperatorKind::Product(factors)))
    }

    pub fn sum(terms: Vec<(C64, StructuredOperator)>) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| crate::error::invalid("terms", "empty sum"))?;
        let (rows, cols) = (first.rows(), first.cols());
        for (_, t) in &terms {
            check("sum rows", rows, t.rows())?;
            check("sum cols", cols, t.cols())?;
        }
        Ok(Self::from_parts(rows, cols, OperatorKind::Sum(terms)))
    }

    pub fn real_sum(terms: Vec<(f64, StructuredOperator)>) -> Result<Self> {
        Self::sum(terms.into_iter().map(|(c, t)| (C64::new(c, 0.0), t)).collect())
    }

    pub fn scaled(self, factor: C64) -> Self {
        let (rows, cols) = (self.rows(), self.cols());
        Self::from_parts(rows, cols, OperatorKind::Sum(vec![(factor, self)]))
    }

    pub fn direct_sum(blocks: Vec<StructuredOperator>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(crate::error::invalid("blocks", "empty direct sum"));
        }
        let rows = blocks.iter().map(|b| b.rows()).sum();
        let cols = blocks.iter().map(|b| b.cols()).sum();
        Ok(Self::from_parts(rows, cols, OperatorKind::DirectSum(blocks)))
    }

    /// Place `inner` inside a `rows x cols` zero matrix at the given offsets.
    pub fn embedding(
        inner: StructuredOperator,
        rows: usize,
        cols: usize,
        row_offset: usize,
        col_offset: usize,
    ) -> Result<Self> {
        if row_offset + inner.rows() > rows || col_offset + inner.cols() > cols {
            return Err(crate::error::invalid(
                "embedding",
                format!(
                    "{}x{} block at ({row_offset}, {col_offset}) does not fit in {rows}x{cols}",
                    inner.rows(),
                    inner.cols()
                ),
            ));
        }
        Ok(Self::from_parts(
            rows,
            cols,
            OperatorKind::Embedding {
                inner,
                row_offset,
                col_offset,
            },
        ))
    }

    /// Square embedding at a common offset.
    pub fn embed_square(inner: StructuredOperator, dim: usize, offset: usize) -> Result<Self> {
        Self::embedding(inner, dim, dim, offset, offset)
    }

    /// Conjugation of `op` by a digit reordering: the operator acting on the
    /// digits laid out as `radices` (most significant first) when `op` itself
    /// was written for the layout `radices` permuted by `order`.
    pub fn reordered(op: StructuredOperator, radices: &[usize], order: &[usize]) -> Result<Self> {
        let to = PermutationMap::reorder(radices, order)?;
        let back = to.inverse();
        check("reordered", to.len(), op.cols())?;
        Self::product(vec![
            Self::permutation(back),
            op,
            Self::permutation(to),
        ])
    }

    pub fn rows(&self) -> usize {
        self.0.rows
    }

    pub fn cols(&self) -> usize {
        self.0.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.0.kind
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind(), OperatorKind::Identity)
    }

    pub fn then(&self, next: &StructuredOperator) -> Result<Self> {
        Self::product(vec![next.clone(), self.clone()])
    }

    /// Structural conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let (rows, cols) = (self.cols(), self.rows());
        let kind = match self.kind() {
            OperatorKind::Identity => OperatorKind::Identity,
            OperatorKind::Permutation(map) => OperatorKind::Permutation(map.inverse()),
            OperatorKind::Diagonal(d) => OperatorKind::Diagonal(d.iter().map(|z| z.conj()).collect()),
            OperatorKind::Dense(m) => OperatorKind::Dense(m.adjoint()),
            OperatorKind::Tensor(a, b) => OperatorKind::Tensor(a.adjoint(), b.adjoint()),
            OperatorKind::Product(fs) => {
                OperatorKind::Product(fs.iter().rev().map(|f| f.adjoint()).collect())
            }
            OperatorKind::Sum(ts) => {
                OperatorKind::Sum(ts.iter().map(|(c, t)| (c.conj(), t.adjoint())).collect())
            }
            OperatorKind::DirectSum(bs) => {
                OperatorKind::DirectSum(bs.iter().map(|b| b.adjoint()).collect())
            }
            OperatorKind::Embedding {
                inner,
                row_offset,
                col_offset,
            } => OperatorKind::Embedding {
                inner: inner.adjoint(),
                row_offset: *col_offset,
                col_offset: *row_offset,
            },
        };
        Self::from_parts(rows, cols, kind)
    }

    /// `op · v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check("apply", self.cols(), v.len())?;
        Ok(self.apply_kron(v, 1))
    }

    /// `opᴴ · v`.
    pub fn apply_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.adjoint().apply(v)
    }

    fn apply_kron(&self, v: &[C64], inner: usize) -> Vec<C64> {
        self.apply_batched(v, v.len() / (self.cols() * inner), inner)
    }

    /// `(I_outer ⊗ op ⊗ I_inner) · v`. Every variant loops over the outer
    /// blocks itself, so nested tensor products never recurse per chunk.
    fn apply_batched(&self, v: &[C64], outer: usize, inner: usize) -> Vec<C64> {
        debug_assert_eq!(v.len(), outer * self.cols() * inner);
        let zero = C64::new(0.0, 0.0);
        let (rows, cols) = (self.rows(), self.cols());
        match self.kind() {
            OperatorKind::Identity => v.to_vec(),
            OperatorKind::Permutation(map) => {
                let mut out = vec![zero; v.len()];
                let block = cols * inner;
                let mut image = Vec::with_capacity(cols);
                map.for_each_image(|_, j| image.push(j));
                for o in 0..outer {
                    let (src, dst) = (&v[o * block..(o + 1) * block], &mut out[o * block..(o + 1) * block]);
                    if inner == 1 {
                        for (i, &j) in image.iter().enumerate() {
                            dst[j] = src[i];
                        }
                    } else {
                        for (i, &j) in image.iter().enumerate() {
                            dst[j * inner..(j + 1) * inner].copy_from_slice(&src[i * inner..(i + 1) * inner]);
                        }
                    }
                }
                out
            }
            OperatorKind::Diagonal(d) => {
                let mut out = v.to_vec();
                for block in out.chunks_mut(cols * inner) {
                    for (chunk, &s) in block.chunks_mut(inner).zip(d.iter()) {
                        for x in chunk {
                            *x *= s;
                        }
                    }
                }
                out
            }
            OperatorKind::Dense(m) => {
                let mut out = vec![zero; outer * rows * inner];
                for o in 0..outer {
                    let src_block = &v[o * cols * inner..(o + 1) * cols * inner];
                    let dst_block = &mut out[o * rows * inner..(o + 1) * rows * inner];
                    for r in 0..rows {
                        let dst = &mut dst_block[r * inner..(r + 1) * inner];
                        for c in 0..cols {
                            let a = m[(r, c)];
                            if a == zero {
                                continue;
                            }
                            let src = &src_block[c * inner..(c + 1) * inner];
                            for (d, s) in dst.iter_mut().zip(src) {
                                *d += a * s;
                            }
                        }
                    }
                }
                out
            }
            OperatorKind::Tensor(a, b) => {
                let tmp = if b.is_identity() {
                    v.to_vec()
                } else {
                    b.apply_batched(v, outer * a.cols(), inner)
                };
                if a.is_identity() {
                    tmp
                } else {
                    a.apply_batched(&tmp, outer, b.rows() * inner)
                }
            }
            OperatorKind::Product(fs) => {
                let mut iter = fs.iter().rev();
                let first = iter.next().expect("non-empty product");
                let mut cur = first.apply_batched(v, outer, inner);
                for f in iter {
                    cur = f.apply_batched(&cur, outer, inner);
                }
                cur
            }
            OperatorKind::Sum(ts) => {
                let mut out = vec![zero; outer * rows * inner];
                for (c, t) in ts {
                    let y = t.apply_batched(v, outer, inner);
                    for (o, yi) in out.iter_mut().zip(y) {
                        *o += c * yi;
                    }
                }
                out
            }
            OperatorKind::DirectSum(bs) => {
                let mut out = vec![zero; outer * rows * inner];
                let (mut col_off, mut row_off) = (0, 0);
                for b in bs {
                    let y = b.apply_batched(&gather(v, outer, cols * inner, col_off * inner, b.cols() * inner), outer, inner);
                    scatter(&mut out, &y, outer, rows * inner, row_off * inner, b.rows() * inner);
                    col_off += b.cols();
                    row_off += b.rows();
                }
                out
            }
            OperatorKind::Embedding {
                inner: op,
                row_offset,
                col_offset,
            } => {
                let mut out = vec![zero; outer * rows * inner];
                let src = gather(v, outer, cols * inner, col_offset * inner, op.cols() * inner);
                let y = op.apply_batched(&src, outer, inner);
                scatter(&mut out, &y, outer, rows * inner, row_offset * inner, op.rows() * inner);
                out
            }
        }
    }

    /// Dense matrix with the default entry cap.
    pub fn materialize(&self) -> Result<DMatrix<C64>> {
        self.materialize_with_cap(MATERIALIZE_CAP)
    }

    pub fn materialize_with_cap(&self, cap: usize) -> Result<DMatrix<C64>> {
        let required = self.rows().saturating_mul(self.cols());
        if required > cap {
            return Err(Error::MaterializeCap {
                rows: self.rows(),
                cols: self.cols(),
                required,
                cap,
            });
        }
        if let OperatorKind::Dense(m) = self.kind() {
            return Ok(m.clone());
        }
        let mut out = DMatrix::zeros(self.rows(), self.cols());
        let mut e = vec![C64::new(0.0, 0.0); self.cols()];
        for j in 0..self.cols() {
            e[j] = C64::new(1.0, 0.0);
            let col = self.apply_kron(&e, 1);
            e[j] = C64::new(0.0, 0.0);
            for (i, x) in col.into_iter().enumerate() {
                out[(i, j)] = x;
            }
        }
        Ok(out)
    }
}

/// Concatenates `v[o·stride + offset ..][..len]` over the outer blocks.
fn gather(v: &[C64], outer: usize, stride: usize, offset: usize, len: usize) -> Vec<C64> {
    if outer == 1 && offset == 0 && len == v.len() {
        return v.to_vec();
    }
    let mut out = Vec::with_capacity(outer * len);
    for o in 0..outer {
        out.extend_from_slice(&v[o * stride + offset..o * stride + offset + len]);
    }
    out
}

fn scatter(out: &mut [C64], y: &[C64], outer: usize, stride: usize, offset: usize, len: usize) {
    for o in 0..outer {
        out[o * stride + offset..o * stride + offset + len].copy_from_slice(&y[o * len..(o + 1) * len]);
    }
}


/// Complex vector helpers shared by the modules.
pub mod vec {
    use super::C64;

    pub fn norm(v: &[C64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn dist(a: &[C64], b: &[C64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    pub fn dot(a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn from_real(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    pub fn real_parts(v: &[C64]) -> Vec<f64> {
        v.iter().map(|z| z.re).collect()
    }

    pub fn basis(dim: usize, k: usize) -> Vec<C64> {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        e[k] = C64::new(1.0, 0.0);
        e
    }

    pub fn scale(v: &mut [C64], s: f64) {
        for x in v {
            *x *= s;
        }
    }

    pub fn scaled(v: &[C64], s: f64) -> Vec<C64> {
        v.iter().map(|x| x * s).collect()
    }
}
