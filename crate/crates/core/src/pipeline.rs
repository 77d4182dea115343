//! End-to-end enhancement.
//!
//! 1. `L̂` from luma, 2. smooth `L`, 3. denoised `R̂` and chroma,
//! 4. `R`, 5. `S′ = R ∘ L^(1/γ)`, 6. recombine with hue/saturation.

use std::time::{Duration, Instant};

use crate::denoise::DenoiseParams;
use crate::error::{NatleError, Result};
use crate::illumination::{estimate_illumination, IlluminationParams};
use crate::linsolve::SolveConfig;
use crate::raster::{hsv_to_rgb, init_illumination, rgb_to_hsv, HsvImage, PlanarImage, RgbImage};
use crate::reflectance::{
    estimate_reflectance, init_reflectance, init_reflectance_noisy, ReflectanceParams,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NatleParams {
    pub illumination: IlluminationParams,
    pub reflectance: ReflectanceParams,
    pub denoise: DenoiseParams,
    /// When false the reflectance initialization skips the RGB denoising
    /// round-trip and keeps the input's hue and saturation.
    pub denoise_enabled: bool,
    pub gamma: f64,
    pub solver: SolveConfig,
}

impl Default for NatleParams {
    fn default() -> Self {
        Self {
            illumination: IlluminationParams::default(),
            reflectance: ReflectanceParams::default(),
            denoise: DenoiseParams::default(),
            denoise_enabled: true,
            gamma: 2.2,
            solver: SolveConfig::default(),
        }
    }
}

impl NatleParams {
    pub fn validate(&self) -> Result<()> {
        self.illumination.validate()?;
        self.reflectance.validate()?;
        self.denoise.validate()?;
        self.solver.validate()?;
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(NatleError::InvalidParam {
                name: "gamma",
                reason: format!("must be positive, got {}", self.gamma),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub illumination: Duration,
    pub denoise: Duration,
    pub reflectance: Duration,
    pub total: Duration,
}

/// Intermediate maps, one per processing stage.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMaps {
    pub lhat: PlanarImage,
    pub l: PlanarImage,
    pub rhat_noisy: PlanarImage,
    pub rhat: PlanarImage,
    pub r: PlanarImage,
    pub s_prime: PlanarImage,
    pub hue: PlanarImage,
    pub sat: PlanarImage,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnhancementTrace {
    pub timings: StageTimings,
    pub warnings: Vec<String>,
    pub maps: Option<TraceMaps>,
    pub illumination_iterations: usize,
}

/// Per-pixel `L^(1/γ)`.
pub fn gamma_correct(l: &PlanarImage, gamma: f64) -> PlanarImage {
    if gamma == 1.0 {
        return l.clone();
    }
    let inv = 1.0 / gamma;
    l.map(|v| v.max(0.0).powf(inv))
}

pub fn enhance(img: &RgbImage, p: &NatleParams) -> Result<(RgbImage, EnhancementTrace)> {
    enhance_traced(img, p, false)
}

pub fn enhance_traced(
    img: &RgbImage,
    p: &NatleParams,
    retain_maps: bool,
) -> Result<(RgbImage, EnhancementTrace)> {
    p.validate()?;
    let (w, h) = img.dims();
    if w == 0 || h == 0 {
        return Err(NatleError::EmptyImage {
            width: w,
            height: h,
        });
    }
    let start = Instant::now();
    let mut trace = EnhancementTrace::default();

    let lhat = init_illumination(img);
    if lhat.max() <= 0.0 {
        trace.warnings.push("all-black input; returned unchanged".into());
        trace.timings.total = start.elapsed();
        return Ok((RgbImage::filled(w, h, [0.0; 3]), trace));
    }

    let t = Instant::now();
    let illum = estimate_illumination(&lhat, &p.illumination, &p.solver)?;
    trace.timings.illumination = t.elapsed();
    trace.illumination_iterations = illum.iterations;
    if illum.clamped > 0 {
        trace.warnings.push(format!(
            "illumination clamped on {} pixels",
            illum.clamped
        ));
    }
    if p.illumination.alpha == 0.0 {
        trace.warnings.push("alpha = 0: illumination equals its initialization".into());
    }
    let l = illum.map;

    let t = Instant::now();
    let hsv = rgb_to_hsv(img);
    let init = if p.denoise_enabled {
        init_reflectance(&hsv, &l, &p.reflectance, &p.denoise)?
    } else {
        init_reflectance_noisy(&hsv, &l, &p.reflectance)?
    };
    trace.timings.denoise = t.elapsed();

    if p.reflectance.beta == 0.0 {
        trace.warnings.push("beta = 0: reflectance equals its initialization".into());
    }
    let t = Instant::now();
    let r = estimate_reflectance(&init, &hsv.v, &p.reflectance, &p.solver)?;
    trace.timings.reflectance = t.elapsed();

    let lit = gamma_correct(&l, p.gamma);
    let s_prime = r.zip_map(&lit, |r, l| r * l)?;
    let out = hsv_to_rgb(&HsvImage::new(
        init.hue.clone(),
        init.sat.clone(),
        s_prime.clamp(0.0, 1.0),
    )?);
    trace.timings.total = start.elapsed();

    if retain_maps {
        trace.maps = Some(TraceMaps {
            lhat,
            l,
            rhat_noisy: init.noisy,
            rhat: init.rhat,
            r,
            s_prime,
            hue: init.hue,
            sat: init.sat,
        });
    }
    Ok((out, trace))
}
