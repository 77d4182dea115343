//! Forward-difference operators and the two 5-point stencil systems.
//!
//! `D_h` and `D_v` are forward differences with a replicate boundary, so the
//! last column of `D_h v` and the last row of `D_v v` are zero. Both systems
//! assembled here have the form `I + Σ_d D_dᵀ Diag(w_d) D_d` with `w_d ≥ 0`:
//! symmetric, unit row sums, and strictly diagonally dominant.

use nalgebra::DMatrix;

use crate::error::{NatleError, Result};
use crate::raster::PlanarImage;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    /// `img(x+1, y) - img(x, y)`, zero on the last column.
    pub gh: PlanarImage,
    /// `img(x, y+1) - img(x, y)`, zero on the last row.
    pub gv: PlanarImage,
}

impl GradientField {
    pub fn dims(&self) -> (usize, usize) {
        self.gh.dims()
    }
}

/// Per-pixel, per-direction weights `A_d(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessWeights {
    pub ah: PlanarImage,
    pub av: PlanarImage,
}

impl SmoothnessWeights {
    pub fn uniform(width: usize, height: usize, value: f64) -> Self {
        Self {
            ah: PlanarImage::filled(width, height, value),
            av: PlanarImage::filled(width, height, value),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.ah.dims()
    }
}

pub fn gradient(img: &PlanarImage) -> GradientField {
    let (w, h) = img.dims();
    let d = img.data();
    let gh = PlanarImage::from_fn(w, h, |x, y| {
        if x + 1 < w {
            d[y * w + x + 1] - d[y * w + x]
        } else {
            0.0
        }
    });
    let gv = PlanarImage::from_fn(w, h, |x, y| {
        if y + 1 < h {
            d[(y + 1) * w + x] - d[y * w + x]
        } else {
            0.0
        }
    });
    GradientField { gh, gv }
}

/// Accumulate `D_hᵀ u_h + D_vᵀ u_v` into `out`.
fn add_adjoint(w: usize, h: usize, uh: &[f64], uv: &[f64], out: &mut [f64]) {
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let mut acc = 0.0;
            if x + 1 < w {
                acc -= uh[i];
            }
            if x > 0 {
                acc += uh[i - 1];
            }
            if y + 1 < h {
                acc -= uv[i];
            }
            if y > 0 {
                acc += uv[i - w];
            }
            out[i] += acc;
        }
    }
}

/// `Σ_d D_dᵀ (w_d ∘ field_d)` as an image.
pub fn divergence_weighted(field: &GradientField, w: &SmoothnessWeights) -> Result<PlanarImage> {
    field.gh.ensure_same_dims(&field.gv)?;
    field.gh.ensure_same_dims(&w.ah)?;
    field.gh.ensure_same_dims(&w.av)?;
    let (width, height) = field.dims();
    let uh: Vec<f64> = field
        .gh
        .data()
        .iter()
        .zip(w.ah.data())
        .map(|(g, a)| g * a)
        .collect();
    let uv: Vec<f64> = field
        .gv
        .data()
        .iter()
        .zip(w.av.data())
        .map(|(g, a)| g * a)
        .collect();
    let mut out = vec![0.0; width * height];
    add_adjoint(width, height, &uh, &uv, &mut out);
    PlanarImage::new(width, height, out)
}

/// Unweighted `Σ_d D_dᵀ field_d`.
pub fn divergence(field: &GradientField) -> Result<PlanarImage> {
    field.gh.ensure_same_dims(&field.gv)?;
    let (width, height) = field.dims();
    let mut out = vec![0.0; width * height];
    add_adjoint(width, height, field.gh.data(), field.gv.data(), &mut out);
    PlanarImage::new(width, height, out)
}

/// Symmetric 5-point stencil matrix `I + Σ_d D_dᵀ Diag(w_d) D_d`.
///
/// `east[i]` couples pixel `i` with `i + 1`, `south[i]` couples `i` with
/// `i + width`; both are zero where the neighbour falls outside the image.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    width: usize,
    height: usize,
    diag: Vec<f64>,
    east: Vec<f64>,
    south: Vec<f64>,
}

impl SparseSystem {
    fn from_edge_weights(width: usize, height: usize, east: Vec<f64>, south: Vec<f64>) -> Self {
        let mut diag = vec![1.0; width * height];
        for y in 0..height {
            for x in 0..width {
                let i = y * width + x;
                let mut d = east[i] + south[i];
                if x > 0 {
                    d += east[i - 1];
                }
                if y > 0 {
                    d += south[i - width];
                }
                diag[i] += d;
            }
        }
        Self {
            width,
            height,
            diag,
            east,
            south,
        }
    }

    pub fn identity(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            diag: vec![1.0; n],
            east: vec![0.0; n],
            south: vec![0.0; n],
        }
    }

    /// Number of unknowns, `width * height`.
    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// True when every off-diagonal coupling is zero.
    pub fn is_identity(&self) -> bool {
        self.east.iter().chain(&self.south).all(|&w| w == 0.0)
            && self.diag.iter().all(|&d| d == 1.0)
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if lo == hi {
            self.diag[lo]
        } else if hi == lo + 1 && (lo + 1) % self.width != 0 {
            -self.east[lo]
        } else if hi == lo + self.width {
            -self.south[lo]
        } else {
            0.0
        }
    }

    /// `out = A x`
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let w = self.width;
        let n = self.order();
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(out.len(), n);
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            let col = i % w;
            if col + 1 < w {
                acc -= self.east[i] * x[i + 1];
            }
            if col > 0 {
                acc -= self.east[i - 1] * x[i - 1];
            }
            if i + w < n {
                acc -= self.south[i] * x[i + w];
            }
            if i >= w {
                acc -= self.south[i - w] * x[i - w];
            }
            out[i] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.order();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }
}

fn check_weights(img: &PlanarImage) -> Result<()> {
    if let Some(index) = img.data().iter().position(|v| !v.is_finite()) {
        return Err(NatleError::NonFiniteWeight { index });
    }
    if let Some(&v) = img.data().iter().find(|&&v| v < 0.0) {
        return Err(NatleError::InvalidParam {
            name: "smoothness weight",
            reason: format!("negative value {v}"),
        });
    }
    Ok(())
}

/// `I + Σ_d D_dᵀ Diag(a_d) D_d`
pub fn assemble_illumination_system(w: &SmoothnessWeights) -> Result<SparseSystem> {
    w.ah.ensure_same_dims(&w.av)?;
    check_weights(&w.ah)?;
    check_weights(&w.av)?;
    let (width, height) = w.dims();
    let east = w
        .ah
        .data()
        .iter()
        .enumerate()
        .map(|(i, &a)| if i % width + 1 < width { a } else { 0.0 })
        .collect();
    let n = width * height;
    let south = w
        .av
        .data()
        .iter()
        .enumerate()
        .map(|(i, &a)| if i + width < n { a } else { 0.0 })
        .collect();
    Ok(SparseSystem::from_edge_weights(width, height, east, south))
}

/// `I + β Σ_d D_dᵀ D_d`
pub fn assemble_reflectance_system(beta: f64, width: usize, height: usize) -> Result<SparseSystem> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(NatleError::NegativeBeta(beta));
    }
    assemble_illumination_system(&SmoothnessWeights::uniform(width, height, beta))
}
