//! Step 1: piece-wise smooth illumination from the luma initialization.
//!
//! The L1 smoothness term is replaced by per-pixel quadratic weights
//! `A_d(x) = α / (|∇_d L̂(x)| + ε)` computed once from `L̂`, which makes the
//! estimate a single SPD solve:
//!
//! ```text
//! (I + Σ_d D_dᵀ Diag(A_d) D_d) l = l̂
//! ```

use crate::error::{NatleError, Result};
use crate::linsolve::{solve_spd, SolveConfig};
use crate::operators::{assemble_illumination_system, gradient, SmoothnessWeights};
use crate::raster::PlanarImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationParams {
    pub alpha: f64,
    /// Gradient floor in the weight denominator; also the lower clamp of `L`.
    pub eps: f64,
}

impl Default for IlluminationParams {
    fn default() -> Self {
        Self {
            alpha: 0.015,
            eps: 1e-3,
        }
    }
}

impl IlluminationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return Err(NatleError::InvalidParam {
                name: "alpha",
                reason: format!("must be a non-negative number, got {}", self.alpha),
            });
        }
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(NatleError::InvalidParam {
                name: "eps",
                reason: format!("must be positive, got {}", self.eps),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IlluminationEstimate {
    /// Solution clamped to `[eps, 1]`.
    pub map: PlanarImage,
    /// Pixels moved by the clamp.
    pub clamped: usize,
    pub iterations: usize,
}

pub fn smoothness_weights(lhat: &PlanarImage, p: &IlluminationParams) -> SmoothnessWeights {
    let g = gradient(lhat);
    let weight = |d: f64| p.alpha / (d.abs() + p.eps);
    SmoothnessWeights {
        ah: g.gh.map(weight),
        av: g.gv.map(weight),
    }
}

/// `‖L − L̂‖² + Σ_x Σ_d A_d(x) (∇_d L(x))²`
pub fn illumination_objective(
    l: &PlanarImage,
    lhat: &PlanarImage,
    weights: &SmoothnessWeights,
) -> Result<f64> {
    l.ensure_same_dims(lhat)?;
    l.ensure_same_dims(&weights.ah)?;
    let fidelity: f64 = l
        .data()
        .iter()
        .zip(lhat.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let g = gradient(l);
    let smooth: f64 = g
        .gh
        .data()
        .iter()
        .zip(weights.ah.data())
        .chain(g.gv.data().iter().zip(weights.av.data()))
        .map(|(d, a)| a * d * d)
        .sum();
    Ok(fidelity + smooth)
}

/// Unclamped minimizer of the weighted quadratic objective.
pub fn solve_illumination(
    lhat: &PlanarImage,
    p: &IlluminationParams,
    cfg: &SolveConfig,
) -> Result<(PlanarImage, usize)> {
    p.validate()?;
    let weights = smoothness_weights(lhat, p);
    let system = assemble_illumination_system(&weights)?;
    let sol = solve_spd(&system, lhat, cfg)?;
    Ok((sol.x, sol.iterations))
}

pub fn estimate_illumination(
    lhat: &PlanarImage,
    p: &IlluminationParams,
    cfg: &SolveConfig,
) -> Result<IlluminationEstimate> {
    let (raw, iterations) = solve_illumination(lhat, p, cfg)?;
    let clamped = raw
        .data()
        .iter()
        .filter(|&&v| v < p.eps || v > 1.0)
        .count();
    if clamped > 0 {
        log::debug!("illumination clamp moved {clamped} pixels into [{}, 1]", p.eps);
    }
    Ok(IlluminationEstimate {
        map: raw.clamp(p.eps, 1.0),
        clamped,
        iterations,
    })
}
