use nalgebra::{DMatrix, DVector};

use super::{StructuredOperator, C64};
use crate::error::{invalid, Error, Result};

/// Norm excess tolerated (and clamped) before completion is refused.
pub const COMPLETION_SLACK: f64 = 1e-6;

/// Square root of a Hermitian positive semidefinite matrix, negative
/// eigenvalues from round-off clamped to zero.
fn psd_sqrt(h: DMatrix<C64>) -> DMatrix<C64> {
    let n = h.nrows();
    let eig = h.symmetric_eigen();
    let roots = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&roots) * v.adjoint()
}

/// Unitary dilation `[[B, √(I−BBᴴ)], [√(I−BᴴB), −Bᴴ]]` of a contraction.
///
/// Singular values in `(1, 1 + 1e-6]` are clamped to one with a warning.
pub fn unitary_completion(b: &DMatrix<C64>) -> Result<StructuredOperator> {
    let (r, c) = (b.nrows(), b.ncols());
    if r == 0 || c == 0 {
        return Err(invalid("B", "empty matrix"));
    }
    let svd = b.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax > 1.0 + COMPLETION_SLACK {
        return Err(Error::NotContraction {
            norm: smax,
            slack: COMPLETION_SLACK,
        });
    }
    let b = if smax > 1.0 + 1e-12 {
        log::warn!("unitary completion: clamping singular value {smax} to 1");
        let u = svd.u.as_ref().expect("requested u");
        let vt = svd.v_t.as_ref().expect("requested v_t");
        let s = DVector::from_iterator(
            svd.singular_values.len(),
            svd.singular_values.iter().map(|&x| C64::new(x.min(1.0), 0.0)),
        );
        u * DMatrix::from_diagonal(&s) * vt
    } else {
        b.clone()
    };
    let bh = b.adjoint();
    let top = psd_sqrt(DMatrix::identity(r, r) - &b * &bh);
    let bottom = psd_sqrt(DMatrix::identity(c, c) - &bh * &b);
    let mut u = DMatrix::zeros(r + c, r + c);
    u.view_mut((0, 0), (r, c)).copy_from(&b);
    u.view_mut((0, c), (r, r)).copy_from(&top);
    u.view_mut((r, 0), (c, c)).copy_from(&bottom);
    u.view_mut((r, c), (c, r)).copy_from(&(-bh));
    Ok(StructuredOperator::dense(u))
}

/// Unitary whose first column is the unit vector `v` (phased Householder reflection).
pub fn householder_completion(v: &[C64]) -> Result<DMatrix<C64>> {
    let d = v.len();
    let norm = super::vec::norm(v);
    if d == 0 || (norm - 1.0).abs() > 1e-10 {
        return Err(invalid("v", format!("expected a unit vector, got norm {norm}")));
    }
    let phase = if v[0].norm() > 0.0 {
        v[0] / v[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    // u = e0 − φ̄v maps e0 to φ̄v under the reflection
    let mut u = DVector::from_iterator(d, v.iter().map(|z| -phase.conj() * z));
    u[0] += C64::new(1.0, 0.0);
    let un2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let mut h = DMatrix::identity(d, d);
    if un2 > 1e-30 {
        h -= (&u * u.adjoint()) * C64::new(2.0 / un2, 0.0);
    }
    Ok(h * phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::verify_unitary;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn real(rows: usize, cols: usize, e: &[f64]) -> DMatrix<C64> {
        DMatrix::from_row_slice(rows, cols, &e.iter().map(|&x| c(x)).collect::<Vec<_>>())
    }

    #[test]
    fn zero_scalar_becomes_swap() {
        let u = unitary_completion(&real(1, 1, &[0.0])).unwrap().materialize().unwrap();
        assert!((u - real(2, 2, &[0.0, 1.0, 1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn identity_becomes_reflection() {
        let u = unitary_completion(&DMatrix::identity(2, 2)).unwrap().materialize().unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(1.0), c(-1.0), c(-1.0)]));
        assert!((u - expected).norm() < 1e-15);
    }

    #[test]
    fn diagonal_contraction_blocks() {
        let op = unitary_completion(&real(2, 2, &[0.6, 0.0, 0.0, 0.8])).unwrap();
        assert!(verify_unitary(&op, 1e-10).unitary);
        let u = op.materialize().unwrap();
        let expect = [
            [0.6, 0.0, 0.8, 0.0],
            [0.0, 0.8, 0.0, 0.6],
            [0.8, 0.0, -0.6, 0.0],
            [0.0, 0.6, 0.0, -0.8],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((u[(i, j)] - c(expect[i][j])).norm() < 1e-12, "({i},{j})");
            }
        }
    }

    #[test]
    fn dense_complex_contraction() {
        let b = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.3, 0.2), C64::new(-0.1, 0.4), C64::new(0.05, 0.0), C64::new(0.2, -0.5)],
        );
        let op = unitary_completion(&b).unwrap();
        assert!(verify_unitary(&op, 1e-10).unitary);
        let u = op.materialize().unwrap();
        assert!((u.view((0, 0), (2, 2)) - &b).norm() < 1e-12);
    }

    #[test]
    fn rejects_expansive_and_clamps_marginal() {
        assert!(matches!(
            unitary_completion(&real(1, 1, &[1.1])),
            Err(Error::NotContraction { .. })
        ));
        let op = unitary_completion(&real(1, 1, &[1.0 + 1e-8])).unwrap();
        assert!(verify_unitary(&op, 1e-10).unitary);
    }

    #[test]
    fn householder_first_column() {
        let v: Vec<C64> = vec![C64::new(0.0, 0.6), c(0.0), c(0.8), c(0.0)];
        let u = householder_completion(&v).unwrap();
        for (i, z) in v.iter().enumerate() {
            assert!((u[(i, 0)] - z).norm() < 1e-14);
        }
        assert!((u.adjoint() * &u - DMatrix::identity(4, 4)).norm() < 1e-13);
        let e = householder_completion(&[c(0.0), c(1.0)]).unwrap();
        assert!((e[(1, 0)] - c(1.0)).norm() < 1e-15);
    }
}
