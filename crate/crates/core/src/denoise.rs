//! Median + adaptive bilateral denoising applied per RGB channel.
//!
//! The bilateral pass uses a fixed spatial Gaussian and a per-pixel range
//! sigma taken from a local noise-level estimate, so flat noisy regions are
//! smoothed harder than quiet ones while strong edges still suppress
//! cross-edge averaging.

use crate::error::{NatleError, Result};
use crate::raster::{PlanarImage, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseParams {
    pub median_radius: usize,
    pub abf_spatial_sigma: f64,
    pub abf_range_sigma_min: f64,
    pub abf_range_sigma_max: f64,
    pub abf_window_radius: usize,
    pub noise_window_radius: usize,
}

impl Default for DenoiseParams {
    fn default() -> Self {
        Self {
            median_radius: 1,
            abf_spatial_sigma: 2.0,
            abf_range_sigma_min: 0.03,
            abf_range_sigma_max: 0.15,
            abf_window_radius: 5,
            noise_window_radius: 3,
        }
    }
}

impl DenoiseParams {
    pub fn validate(&self) -> Result<()> {
        let radius_ok = |name: &'static str, r: usize| {
            if r == 0 {
                Err(NatleError::InvalidParam {
                    name,
                    reason: "radius must be at least 1".into(),
                })
            } else {
                Ok(())
            }
        };
        radius_ok("median_radius", self.median_radius)?;
        radius_ok("abf_window_radius", self.abf_window_radius)?;
        radius_ok("noise_window_radius", self.noise_window_radius)?;
        if !(self.abf_spatial_sigma > 0.0) {
            return Err(NatleError::InvalidParam {
                name: "abf_spatial_sigma",
                reason: format!("must be positive, got {}", self.abf_spatial_sigma),
            });
        }
        if !(self.abf_range_sigma_min > 0.0 && self.abf_range_sigma_min <= self.abf_range_sigma_max)
        {
            return Err(NatleError::InvalidParam {
                name: "abf_range_sigma_min",
                reason: format!(
                    "need 0 < min <= max, got {} / {}",
                    self.abf_range_sigma_min, self.abf_range_sigma_max
                ),
            });
        }
        Ok(())
    }
}

/// Median over the `(2r+1)²` replicate-padded neighbourhood.
pub fn median_filter(ch: &PlanarImage, radius: usize) -> PlanarImage {
    let (w, h) = ch.dims();
    let r = radius as isize;
    let side = 2 * radius + 1;
    let mid = side * side / 2;
    let mut window = Vec::with_capacity(side * side);
    PlanarImage::from_fn(w, h, |x, y| {
        window.clear();
        for dy in -r..=r {
            for dx in -r..=r {
                window.push(ch.get_clamped(x as isize + dx, y as isize + dy));
            }
        }
        let (_, m, _) = window.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
        *m
    })
}

/// Local noise-level proxy: the standard deviation of `pixel − window mean`
/// over the `(2r+1)²` replicate-padded window.
pub fn estimate_local_sigma(ch: &PlanarImage, radius: usize) -> PlanarImage {
    let (w, h) = ch.dims();
    let r = radius as isize;
    let count = ((2 * radius + 1) * (2 * radius + 1)) as f64;
    PlanarImage::from_fn(w, h, |x, y| {
        let (x, y) = (x as isize, y as isize);
        let mut sum = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                sum += ch.get_clamped(x + dx, y + dy);
            }
        }
        let mean = sum / count;
        let mut sq = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let d = ch.get_clamped(x + dx, y + dy) - mean;
                sq += d * d;
            }
        }
        (sq / count).sqrt()
    })
}

/// Bilateral filter with a per-pixel range sigma
/// `clamp(sigma_map, abf_range_sigma_min, abf_range_sigma_max)`.
///
/// The window is truncated at the image border rather than padded.
pub fn adaptive_bilateral(
    ch: &PlanarImage,
    sigma_map: &PlanarImage,
    p: &DenoiseParams,
) -> Result<PlanarImage> {
    ch.ensure_same_dims(sigma_map)?;
    let (w, h) = ch.dims();
    let rad = p.abf_window_radius as isize;
    let side = 2 * p.abf_window_radius + 1;
    let inv_two_ss = 1.0 / (2.0 * p.abf_spatial_sigma * p.abf_spatial_sigma);
    let spatial: Vec<f64> = (-rad..=rad)
        .flat_map(|dy| (-rad..=rad).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) * inv_two_ss).exp())
        .collect();
    let src = ch.data();
    let sig = sigma_map.data();

    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        let y0 = (y - rad).max(0);
        let y1 = (y + rad).min(h as isize - 1);
        for x in 0..w as isize {
            let x0 = (x - rad).max(0);
            let x1 = (x + rad).min(w as isize - 1);
            let i = (y as usize) * w + x as usize;
            let center = src[i];
            let sr = sig[i].clamp(p.abf_range_sigma_min, p.abf_range_sigma_max);
            let inv_two_sr = 1.0 / (2.0 * sr * sr);
            let mut num = 0.0;
            let mut den = 0.0;
            for qy in y0..=y1 {
                let row = qy as usize * w;
                let krow = ((qy - y + rad) as usize) * side;
                for qx in x0..=x1 {
                    let v = src[row + qx as usize];
                    let d = v - center;
                    let wt = spatial[krow + (qx - x + rad) as usize] * (-d * d * inv_two_sr).exp();
                    num += wt * v;
                    den += wt;
                }
            }
            out.push(num / den);
        }
    }
    PlanarImage::new(w, h, out)
}

/// Median then adaptive bilateral per channel; the noise map is estimated on
/// the median output.
pub fn denoise_channel(ch: &PlanarImage, p: &DenoiseParams) -> Result<PlanarImage> {
    let med = median_filter(ch, p.median_radius);
    let sigma = estimate_local_sigma(&med, p.noise_window_radius);
    adaptive_bilateral(&med, &sigma, p)
}

pub fn denoise_rgb(img: &RgbImage, p: &DenoiseParams) -> Result<RgbImage> {
    p.validate()?;
    RgbImage::new(
        denoise_channel(&img.r, p)?,
        denoise_channel(&img.g, p)?,
        denoise_channel(&img.b, p)?,
    )
}
