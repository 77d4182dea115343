//! Step 2: noise-free, texture-preserving reflectance.
//!
//! The initialization divides the value channel by the illumination and
//! removes noise with an RGB round-trip through [`denoise_rgb`]. The
//! estimate then solves
//!
//! ```text
//! (I + β Σ_d D_dᵀ D_d) r = r̂ + β Σ_d D_dᵀ g_d
//! ```
//!
//! where `G` keeps `λ ∇S` for gradients of magnitude at least `eps_g` and
//! zeroes the rest.

use crate::denoise::{denoise_rgb, DenoiseParams};
use crate::error::{NatleError, Result};
use crate::linsolve::{solve_spd, SolveConfig};
use crate::operators::{assemble_reflectance_system, divergence, gradient, GradientField};
use crate::raster::{hsv_to_rgb, rgb_to_hsv, HsvImage, PlanarImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectanceParams {
    pub beta: f64,
    pub lambda: f64,
    pub eps_g: f64,
    /// Guard added to `L` in the division `S / (L + ε)`.
    pub epsilon_div: f64,
    /// Upper bound on `S / (L + ε)` before denoising.
    pub ratio_cap: f64,
}

impl Default for ReflectanceParams {
    fn default() -> Self {
        Self {
            beta: 3.0,
            lambda: 1.1,
            eps_g: 0.02,
            epsilon_div: 1e-3,
            ratio_cap: 10.0,
        }
    }
}

impl ReflectanceParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(NatleError::NegativeBeta(self.beta));
        }
        let check = |name: &'static str, v: f64, ok: bool| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(NatleError::InvalidParam {
                    name,
                    reason: format!("out of range: {v}"),
                })
            }
        };
        check("lambda", self.lambda, self.lambda > 0.0)?;
        check("eps_g", self.eps_g, self.eps_g >= 0.0)?;
        check("epsilon_div", self.epsilon_div, self.epsilon_div > 0.0)?;
        check("ratio_cap", self.ratio_cap, self.ratio_cap >= 1.0)?;
        if self.lambda < 1.0 {
            log::warn!("lambda {} < 1 attenuates texture instead of amplifying it", self.lambda);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectanceInit {
    /// Initial reflectance (denoised value channel); may exceed 1.
    pub rhat: PlanarImage,
    pub hue: PlanarImage,
    pub sat: PlanarImage,
    /// Capped `S / (L + ε)` before denoising.
    pub noisy: PlanarImage,
}

/// Capped `V / (L + ε)`.
pub fn divide_by_illumination(
    v: &PlanarImage,
    l: &PlanarImage,
    p: &ReflectanceParams,
) -> Result<PlanarImage> {
    v.zip_map(l, |s, l| (s / (l + p.epsilon_div)).min(p.ratio_cap))
}

/// Initialization without the denoising round-trip; hue and saturation are
/// passed through from the input.
pub fn init_reflectance_noisy(
    input: &HsvImage,
    l: &PlanarImage,
    p: &ReflectanceParams,
) -> Result<ReflectanceInit> {
    p.validate()?;
    let noisy = divide_by_illumination(&input.v, l, p)?;
    Ok(ReflectanceInit {
        rhat: noisy.clone(),
        hue: input.h.clone(),
        sat: input.s.clone(),
        noisy,
    })
}

/// Noise-free initialization via an RGB denoising round-trip.
///
/// Values of the division above 1 are split into a `[0, 1]` part that goes
/// through the color conversion and a per-pixel overflow factor that is
/// multiplied back onto the denoised value channel.
pub fn init_reflectance(
    input: &HsvImage,
    l: &PlanarImage,
    p: &ReflectanceParams,
    dp: &DenoiseParams,
) -> Result<ReflectanceInit> {
    p.validate()?;
    dp.validate()?;
    let noisy = divide_by_illumination(&input.v, l, p)?;
    let overflow = noisy.map(|v| v.max(1.0));
    let in_range = noisy.zip_map(&overflow, |v, f| v / f)?;

    let rgb = hsv_to_rgb(&HsvImage::new(input.h.clone(), input.s.clone(), in_range)?);
    let denoised = rgb_to_hsv(&denoise_rgb(&rgb, dp)?);
    let rhat = denoised.v.zip_map(&overflow, |v, f| v * f)?;
    Ok(ReflectanceInit {
        rhat,
        hue: denoised.h,
        sat: denoised.s,
        noisy,
    })
}

/// Target gradients: `λ ∇_d S` where `|∇_d S| ≥ eps_g`, else 0.
pub fn compute_g(s: &PlanarImage, p: &ReflectanceParams) -> GradientField {
    let g = gradient(s);
    let target = |d: f64| if d.abs() < p.eps_g { 0.0 } else { p.lambda * d };
    GradientField {
        gh: g.gh.map(target),
        gv: g.gv.map(target),
    }
}

/// `‖R − R̂‖² + β ‖∇R − G‖²`
pub fn reflectance_objective(
    r: &PlanarImage,
    rhat: &PlanarImage,
    g: &GradientField,
    beta: f64,
) -> Result<f64> {
    r.ensure_same_dims(rhat)?;
    r.ensure_same_dims(&g.gh)?;
    let fidelity: f64 = r
        .data()
        .iter()
        .zip(rhat.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let gr = gradient(r);
    let mismatch: f64 = gr
        .gh
        .data()
        .iter()
        .zip(g.gh.data())
        .chain(gr.gv.data().iter().zip(g.gv.data()))
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(fidelity + beta * mismatch)
}

/// Solve for `R` given the initialization and the input value channel `s`.
/// The result is not clamped.
pub fn estimate_reflectance(
    init: &ReflectanceInit,
    s: &PlanarImage,
    p: &ReflectanceParams,
    cfg: &SolveConfig,
) -> Result<PlanarImage> {
    p.validate()?;
    init.rhat.ensure_same_dims(s)?;
    if p.beta == 0.0 {
        return Ok(init.rhat.clone());
    }
    let (w, h) = s.dims();
    let g = compute_g(s, p);
    let div = divergence(&g)?;
    let rhs = init.rhat.zip_map(&div, |r, d| r + p.beta * d)?;
    let system = assemble_reflectance_system(p.beta, w, h)?;
    Ok(solve_spd(&system, &rhs, cfg)?.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{rgb_to_hsv, RgbImage};

    #[test]
    fn division_by_illumination() {
        let v = PlanarImage::new(2, 1, vec![0.25, 0.004]).unwrap();
        let l = PlanarImage::new(2, 1, vec![0.5, 0.004]).unwrap();
        let p = ReflectanceParams::default();
        let raw = divide_by_illumination(&v, &l, &p).unwrap();
        assert!((raw.data()[0] - 0.25 / 0.501).abs() < 1e-15);
        assert!((raw.data()[0] - 0.499).abs() < 1e-3);
        assert!((raw.data()[1] - 0.8).abs() < 1e-12);

        let v = PlanarImage::new(1, 1, vec![0.5]).unwrap();
        let l = PlanarImage::new(1, 1, vec![0.001]).unwrap();
        let raw = divide_by_illumination(&v, &l, &p).unwrap();
        assert_eq!(raw.data()[0], p.ratio_cap);
    }

    #[test]
    fn g_threshold_and_sign() {
        let p = ReflectanceParams::default();
        let s = PlanarImage::new(4, 1, vec![0.5, 0.51, 0.71, 0.51]).unwrap();
        let g = compute_g(&s, &p);
        assert_eq!(g.gh.data()[0], 0.0);
        assert!((g.gh.data()[1] - 0.22).abs() < 1e-12);
        assert!((g.gh.data()[2] + 0.22).abs() < 1e-12);
        assert_eq!(g.gh.data()[3], 0.0);
    }

    #[test]
    fn beta_zero_returns_init() {
        let s = PlanarImage::from_fn(5, 5, |x, y| ((x * 3 + y) % 7) as f64 / 7.0);
        let init = ReflectanceInit {
            rhat: s.map(|v| v * 1.3),
            hue: PlanarImage::zeros(5, 5),
            sat: PlanarImage::zeros(5, 5),
            noisy: s.clone(),
        };
        let p = ReflectanceParams {
            beta: 0.0,
            ..Default::default()
        };
        let r = estimate_reflectance(&init, &s, &p, &SolveConfig::default()).unwrap();
        assert_eq!(r, init.rhat);
    }

    #[test]
    fn constant_fixed_point() {
        let s = PlanarImage::filled(6, 4, 0.3);
        let init = ReflectanceInit {
            rhat: PlanarImage::filled(6, 4, 0.8),
            hue: PlanarImage::zeros(6, 4),
            sat: PlanarImage::zeros(6, 4),
            noisy: PlanarImage::filled(6, 4, 0.8),
        };
        let r = estimate_reflectance(&init, &s, &ReflectanceParams::default(), &SolveConfig::default())
            .unwrap();
        assert!(r.data().iter().all(|&v| (v - 0.8).abs() < 1e-12));
    }

    #[test]
    fn init_with_matching_illumination_is_near_one() {
        let img = RgbImage::from_fn(16, 16, |x, y| {
            let t = 0.3 + 0.4 * (x as f64 / 15.0) * (y as f64 / 15.0);
            [t, t * 0.9, t * 0.8]
        });
        let hsv = rgb_to_hsv(&img);
        let init = init_reflectance(
            &hsv,
            &hsv.v,
            &ReflectanceParams::default(),
            &DenoiseParams::default(),
        )
        .unwrap();
        assert!(init.rhat.data().iter().all(|&v| (v - 1.0).abs() < 0.05));
    }

    #[test]
    fn overflow_survives_round_trip() {
        // V / L = 2 everywhere on a flat, gray patch
        let hsv = HsvImage::new(
            PlanarImage::zeros(8, 8),
            PlanarImage::zeros(8, 8),
            PlanarImage::filled(8, 8, 0.4),
        )
        .unwrap();
        let l = PlanarImage::filled(8, 8, 0.2 - 1e-3);
        let init = init_reflectance(&hsv, &l, &ReflectanceParams::default(), &DenoiseParams::default())
            .unwrap();
        assert!(init.rhat.data().iter().all(|&v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn rejects_negative_beta() {
        let p = ReflectanceParams {
            beta: -1.0,
            ..Default::default()
        };
        assert!(matches!(p.validate(), Err(NatleError::NegativeBeta(_))));
    }
}
