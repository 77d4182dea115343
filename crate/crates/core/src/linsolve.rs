//! Preconditioned conjugate gradients for the stencil systems, plus a dense
//! LU oracle for small instances.

use nalgebra::{DMatrix, DVector};

use crate::error::{NatleError, Result};
use crate::operators::SparseSystem;
use crate::raster::PlanarImage;

/// Largest order accepted by [`solve_dense_oracle`].
pub const DENSE_ORACLE_LIMIT: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Stop once `‖Ax − b‖₂ ≤ rel_tolerance · ‖b‖₂`.
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-6,
            max_iterations: 2000,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0) {
            return Err(NatleError::InvalidParam {
                name: "rel_tolerance",
                reason: format!("must be positive, got {}", self.rel_tolerance),
            });
        }
        if self.max_iterations == 0 {
            return Err(NatleError::InvalidParam {
                name: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: PlanarImage,
    pub iterations: usize,
    /// `‖Ax − b‖₂ / ‖b‖₂` recomputed from the returned `x`.
    pub rel_residual: f64,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(system: &SparseSystem, x: &[f64], b: &[f64], r: &mut [f64], scratch: &mut [f64]) {
    system.apply(x, scratch);
    for ((ri, bi), ai) in r.iter_mut().zip(b).zip(scratch.iter()) {
        *ri = bi - ai;
    }
}

/// Solve `A x = b` starting from `x₀ = b`.
///
/// Starting at the right-hand side means an identity system returns `b`
/// bitwise after zero iterations, and since CG decreases the A-norm error
/// monotonically, the quadratic objective at `x` never exceeds its value at
/// the initializer.
pub fn solve_spd(system: &SparseSystem, rhs: &PlanarImage, cfg: &SolveConfig) -> Result<Solution> {
    cfg.validate()?;
    if system.dims() != rhs.dims() {
        return Err(NatleError::DimensionMismatch {
            expected: system.dims(),
            actual: rhs.dims(),
        });
    }
    let (w, h) = rhs.dims();
    let n = system.order();
    let b = rhs.data();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(Solution {
            x: PlanarImage::zeros(w, h),
            iterations: 0,
            rel_residual: 0.0,
        });
    }
    let target = cfg.rel_tolerance * b_norm;

    let inv_diag: Vec<f64> = match cfg.preconditioner {
        Preconditioner::Jacobi => system.diagonal().iter().map(|d| 1.0 / d).collect(),
        Preconditioner::None => vec![1.0; n],
    };

    let mut x = b.to_vec();
    let mut r = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    residual(system, &x, b, &mut r, &mut scratch);
    let mut r_norm = dot(&r, &r).sqrt();

    let mut iterations = 0;
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];

    // Outer loop restarts from the true residual if the recurrence drifted.
    while r_norm > target {
        if iterations >= cfg.max_iterations {
            return Err(NatleError::NotConverged {
                iterations,
                residual: r_norm / b_norm,
            });
        }
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);

        while iterations < cfg.max_iterations {
            system.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let step = rz / pap;
            for i in 0..n {
                x[i] += step * p[i];
                r[i] -= step * ap[i];
            }
            iterations += 1;
            if dot(&r, &r).sqrt() <= target {
                break;
            }
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_next = dot(&r, &z);
            let ratio = rz_next / rz;
            rz = rz_next;
            for i in 0..n {
                p[i] = z[i] + ratio * p[i];
            }
        }

        residual(system, &x, b, &mut r, &mut scratch);
        r_norm = dot(&r, &r).sqrt();
    }

    Ok(Solution {
        x: PlanarImage::new(w, h, x)?,
        iterations,
        rel_residual: r_norm / b_norm,
    })
}

/// Dense LU solve used to cross-check [`solve_spd`] on small systems.
pub fn solve_dense_oracle(matrix: &DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let order = matrix.nrows();
    if order > DENSE_ORACLE_LIMIT {
        return Err(NatleError::OracleTooLarge {
            order,
            limit: DENSE_ORACLE_LIMIT,
        });
    }
    if matrix.ncols() != order || rhs.len() != order {
        return Err(NatleError::DimensionMismatch {
            expected: (order, order),
            actual: (matrix.ncols(), rhs.len()),
        });
    }
    let b = DVector::from_column_slice(rhs);
    matrix
        .clone()
        .lu()
        .solve(&b)
        .map(|x| x.as_slice().to_vec())
        .ok_or(NatleError::Singular)
}
