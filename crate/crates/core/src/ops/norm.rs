use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{vec, StructuredOperator, C64, DENSE_THRESHOLD};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormMethod {
    DenseSvd,
    PowerIteration,
}

impl NormMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormMethod::DenseSvd => "dense-svd",
            NormMethod::PowerIteration => "power-iteration",
        }
    }
}

#[derive(Clone, Debug)]
pub struct OperatorNormReport {
    pub spectral_norm_estimate: f64,
    pub method: NormMethod,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub dense_threshold: usize,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            tol: 1e-8,
            max_iter: 10_000,
            seed: 0x51ab_1e5e_ed00,
            dense_threshold: DENSE_THRESHOLD,
        }
    }
}

/// Largest singular value with the default options and the given tolerance.
pub fn spectral_norm(op: &StructuredOperator, tol: f64) -> Result<OperatorNormReport> {
    spectral_norm_with(
        op,
        &NormOptions {
            tol,
            ..NormOptions::default()
        },
    )
}

pub fn spectral_norm_with(op: &StructuredOperator, opts: &NormOptions) -> Result<OperatorNormReport> {
    if opts.tol <= 0.0 {
        return Err(invalid("tol", "must be positive"));
    }
    if op.rows().max(op.cols()) <= opts.dense_threshold {
        return Ok(OperatorNormReport {
            spectral_norm_estimate: dense_norm(op)?,
            method: NormMethod::DenseSvd,
            iterations: 0,
            residual: 0.0,
        });
    }
    power_norm(op, opts)
}

fn dense_norm(op: &StructuredOperator) -> Result<f64> {
    let m = op.materialize()?;
    if m.iter().all(|z| z.im == 0.0) {
        let re = m.map(|z| z.re);
        Ok(re.singular_values().max())
    } else {
        Ok(m.singular_values().max())
    }
}

/// Seeded random complex unit vector.
pub fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let n = vec::norm(&v);
    vec::scale(&mut v, 1.0 / n);
    v
}

/// Power iteration on `opᴴ·op` with a seeded start vector.
fn power_norm(op: &StructuredOperator, opts: &NormOptions) -> Result<OperatorNormReport> {
    let adj = op.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut v = random_unit_vector(op.cols(), &mut rng);
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let w = op.apply(&v)?;
        let z = adj.apply(&w)?;
        lambda = vec::dot(&v, &z).re;
        if lambda <= 0.0 {
            // v lies in the kernel; the operator is zero on the sampled subspace
            let zn = vec::norm(&z);
            if zn == 0.0 {
                return Ok(OperatorNormReport {
                    spectral_norm_estimate: 0.0,
                    method: NormMethod::PowerIteration,
                    iterations: it,
                    residual: 0.0,
                });
            }
        }
        residual = z
            .iter()
            .zip(&v)
            .map(|(zi, vi)| (zi - vi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt()
            / lambda.max(f64::MIN_POSITIVE);
        if residual <= opts.tol {
            return Ok(OperatorNormReport {
                spectral_norm_estimate: lambda.max(0.0).sqrt(),
                method: NormMethod::PowerIteration,
                iterations: it,
                residual,
            });
        }
        let zn = vec::norm(&z);
        v = z;
        vec::scale(&mut v, 1.0 / zn);
    }
    Err(Error::NoConvergence {
        estimate: lambda.max(0.0).sqrt(),
        iterations: opts.max_iter,
        residual,
    })
}

#[derive(Clone, Debug)]
pub struct UnitarityCheck {
    pub unitary: bool,
    pub defect: f64,
    pub exhaustive: bool,
}

pub fn verify_unitary(op: &StructuredOperator, tol: f64) -> UnitarityCheck {
    verify_unitary_with(op, tol, DENSE_THRESHOLD, 64, 0x0dd_ba11)
}

/// max ‖opᴴ·op·v − v‖ over the basis (small dims) or `probes` random unit vectors.
pub fn verify_unitary_with(
    op: &StructuredOperator,
    tol: f64,
    dense_threshold: usize,
    probes: usize,
    seed: u64,
) -> UnitarityCheck {
    if !op.is_square() {
        return UnitarityCheck {
            unitary: false,
            defect: f64::INFINITY,
            exhaustive: false,
        };
    }
    let dim = op.cols();
    let adj = op.adjoint();
    let defect_of = |v: &[C64]| -> f64 {
        let w = op.apply_kron(v, 1);
        let z = adj.apply_kron(&w, 1);
        vec::dist(&z, v)
    };
    let exhaustive = dim <= dense_threshold;
    let defect = if exhaustive {
        let mut e = vec![C64::new(0.0, 0.0); dim];
        let mut worst: f64 = 0.0;
        for j in 0..dim {
            e[j] = C64::new(1.0, 0.0);
            worst = worst.max(defect_of(&e));
            e[j] = C64::new(0.0, 0.0);
        }
        worst
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..probes)
            .map(|_| defect_of(&random_unit_vector(dim, &mut rng)))
            .fold(0.0, f64::max)
    };
    UnitarityCheck {
        unitary: defect <= tol,
        defect,
        exhaustive,
    }
}
