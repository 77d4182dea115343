//! Reference-based quality metrics.
//!
//! SSIM is computed on the Rec. 601 luma of both images with an 11×11
//! Gaussian window (σ = 1.5) over valid positions only. Images smaller than
//! the window use the largest odd window that fits.

use std::fmt;

use crate::error::{NatleError, Result};
use crate::raster::{init_illumination, PlanarImage, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimConfig {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimConfig {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 1.0,
        }
    }
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - c;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable 'valid' correlation with a 1-D kernel.
fn filter_valid(img: &[f64], w: usize, h: usize, k: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = k.len();
    let ow = w + 1 - n;
    let oh = h + 1 - n;
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            tmp[y * ow + x] = k.iter().enumerate().map(|(i, kv)| kv * img[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = k.iter().enumerate().map(|(i, kv)| kv * tmp[(y + i) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

/// Mean SSIM between two single-channel maps.
pub fn ssim_planar(a: &PlanarImage, b: &PlanarImage, cfg: &SsimConfig) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    if w == 0 || h == 0 {
        return Err(NatleError::EmptyImage {
            width: w,
            height: h,
        });
    }
    let mut size = cfg.window.min(w).min(h);
    if size % 2 == 0 {
        size -= 1;
    }
    let k = gaussian_kernel(size, cfg.sigma);
    let c1 = (cfg.k1 * cfg.dynamic_range).powi(2);
    let c2 = (cfg.k2 * cfg.dynamic_range).powi(2);

    let (da, db) = (a.data(), b.data());
    let aa: Vec<f64> = da.iter().map(|v| v * v).collect();
    let bb: Vec<f64> = db.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = da.iter().zip(db).map(|(x, y)| x * y).collect();

    let (mu_a, ow, oh) = filter_valid(da, w, h, &k);
    let (mu_b, _, _) = filter_valid(db, w, h, &k);
    let (e_aa, _, _) = filter_valid(&aa, w, h, &k);
    let (e_bb, _, _) = filter_valid(&bb, w, h, &k);
    let (e_ab, _, _) = filter_valid(&ab, w, h, &k);

    let mut total = 0.0;
    for i in 0..ow * oh {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = e_aa[i] - ma * ma;
        let vb = e_bb[i] - mb * mb;
        let cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / (ow * oh) as f64)
}

/// Mean SSIM on luma.
pub fn ssim(a: &RgbImage, b: &RgbImage, cfg: &SsimConfig) -> Result<f64> {
    a.ensure_same_dims(b)?;
    ssim_planar(&init_illumination(a), &init_illumination(b), cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Psnr {
    Identical,
    Db(f64),
}

impl Psnr {
    /// Decibels, with `Identical` mapped to +∞.
    pub fn value(self) -> f64 {
        match self {
            Psnr::Identical => f64::INFINITY,
            Psnr::Db(v) => v,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Identical => write!(f, "identical"),
            Psnr::Db(v) => write!(f, "{v:.4}"),
        }
    }
}

pub fn mse(a: &RgbImage, b: &RgbImage) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (ca, cb) in a.channels().into_iter().zip(b.channels()) {
        for (x, y) in ca.data().iter().zip(cb.data()) {
            sum += (x - y) * (x - y);
            n += 1;
        }
    }
    if n == 0 {
        let (width, height) = a.dims();
        return Err(NatleError::EmptyImage { width, height });
    }
    Ok(sum / n as f64)
}

/// `10 log10(1 / MSE)` over all channels.
pub fn psnr(a: &RgbImage, b: &RgbImage) -> Result<Psnr> {
    let m = mse(a, b)?;
    if m == 0.0 {
        Ok(Psnr::Identical)
    } else {
        Ok(Psnr::Db(10.0 * (1.0 / m).log10()))
    }
}
