//! Noise-aware, texture-preserving retinex enhancement for low-light images.
//!
//! The enhancer decomposes the value channel of an input image into an
//! illumination map `L` and a reflectance map `R` (`S = R ∘ L`) with two
//! closed-form quadratic solves, removes noise from the reflectance
//! initialization with a median + adaptive bilateral filter pass in RGB,
//! and recombines `R ∘ L^(1/γ)` with the denoised hue and saturation.
//!
//! ```no_run
//! use natle::{enhance, load_image, save_image, NatleParams};
//!
//! let img = load_image("dark.png").unwrap();
//! let (out, trace) = enhance(&img, &NatleParams::default()).unwrap();
//! save_image("bright.png", &out).unwrap();
//! println!("took {:?}", trace.timings.total);
//! ```
//!
//! All maps are `f64` in `[0, 1]`; only the final save clamps.

pub mod denoise;
pub mod error;
pub mod illumination;
pub mod linsolve;
pub mod metrics;
pub mod operators;
pub mod pipeline;
pub mod raster;
pub mod reflectance;

pub use denoise::{denoise_rgb, DenoiseParams};
pub use error::{NatleError, Result};
pub use illumination::{estimate_illumination, IlluminationParams};
pub use linsolve::{solve_spd, Preconditioner, SolveConfig};
pub use metrics::{psnr, ssim, Psnr, SsimConfig};
pub use pipeline::{enhance, enhance_traced, gamma_correct, EnhancementTrace, NatleParams};
pub use raster::{load_image, save_image, HsvImage, PlanarImage, RgbImage};
pub use reflectance::{estimate_reflectance, init_reflectance, ReflectanceParams};
