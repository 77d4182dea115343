//! Seeded synthetic fixtures shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use natle::denoise::DenoiseParams;
use natle::linsolve::solve_dense_oracle;
use natle::reflectance::ReflectanceParams;
use natle::{PlanarImage, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_planar(w: usize, h: usize, lo: f64, hi: f64, seed: u64) -> PlanarImage {
    let mut r = rng(seed);
    PlanarImage::from_fn(w, h, |_, _| r.random_range(lo..hi))
}

pub fn random_rgb(w: usize, h: usize, seed: u64) -> RgbImage {
    let mut r = rng(seed);
    RgbImage::from_fn(w, h, |_, _| [r.random(), r.random(), r.random()])
}

/// Piece-wise smooth colored regions with fine texture and soft shading;
/// values stay inside `[0.04, 0.96]`.
pub fn scene(w: usize, h: usize, seed: u64) -> RgbImage {
    let mut r = rng(seed);
    struct Blob {
        cx: f64,
        cy: f64,
        rx: f64,
        ry: f64,
        color: [f64; 3],
        freq: f64,
        angle: f64,
    }
    let blobs: Vec<Blob> = (0..7)
        .map(|_| Blob {
            cx: r.random_range(0.0..w as f64),
            cy: r.random_range(0.0..h as f64),
            rx: r.random_range(0.12..0.4) * w as f64,
            ry: r.random_range(0.12..0.4) * h as f64,
            color: [
                r.random_range(0.15..0.9),
                r.random_range(0.15..0.9),
                r.random_range(0.15..0.9),
            ],
            freq: r.random_range(0.25..0.9),
            angle: r.random_range(0.0..std::f64::consts::PI),
        })
        .collect();
    let base = [
        r.random_range(0.3..0.6),
        r.random_range(0.3..0.6),
        r.random_range(0.3..0.6),
    ];
    RgbImage::from_fn(w, h, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let mut c = base;
        let mut freq = 0.35;
        let mut angle = 0.3;
        for b in &blobs {
            let dx = (xf - b.cx) / b.rx;
            let dy = (yf - b.cy) / b.ry;
            if dx * dx + dy * dy < 1.0 {
                c = b.color;
                freq = b.freq;
                angle = b.angle;
            }
        }
        let u = xf * angle.cos() + yf * angle.sin();
        let texture = 0.08 * (u * freq).sin();
        let shade = 0.85 + 0.15 * (xf / w as f64 - 0.5) * (yf / h as f64 - 0.5) * 4.0;
        c.map(|v| ((v + texture) * shade).clamp(0.04, 0.96))
    })
}

/// LOL-style low-light rendition: dimmed, slightly compressed, with additive
/// Gaussian noise.
pub fn darken(img: &RgbImage, scale: f64, noise_sigma: f64, seed: u64) -> RgbImage {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, noise_sigma.max(1e-300)).unwrap();
    img.map_channels(|c| {
        c.map(|v| {
            let n = if noise_sigma > 0.0 { normal.sample(&mut r) } else { 0.0 };
            (scale * v.powf(1.2) + n).clamp(0.0, 1.0)
        })
    })
}

pub fn add_gaussian_noise(img: &RgbImage, sigma: f64, seed: u64) -> RgbImage {
    let mut r = rng(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    img.map_channels(|c| c.map(|v| (v + normal.sample(&mut r)).clamp(0.0, 1.0)))
}

/// Replace `fraction` of pixels with pure black or white in all channels.
pub fn salt_and_pepper(img: &RgbImage, fraction: f64, seed: u64) -> RgbImage {
    let mut r = rng(seed);
    let (w, h) = img.dims();
    let mut hits = vec![None; w * h];
    for hit in hits.iter_mut() {
        if r.random::<f64>() < fraction {
            *hit = Some(if r.random::<bool>() { 1.0 } else { 0.0 });
        }
    }
    RgbImage::from_fn(w, h, |x, y| {
        let i = y * w + x;
        match hits[i] {
            Some(v) => [v, v, v],
            None => img.pixel(x, y),
        }
    })
}

/// Sum of absolute forward differences.
pub fn total_variation(img: &PlanarImage) -> f64 {
    let g = natle::operators::gradient(img);
    g.gh.data().iter().chain(g.gv.data()).map(|v| v.abs()).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn mean_abs_diff_rgb(a: &RgbImage, b: &RgbImage) -> f64 {
    let mut s = 0.0;
    let mut n = 0;
    for (ca, cb) in a.channels().into_iter().zip(b.channels()) {
        for (x, y) in ca.data().iter().zip(cb.data()) {
            s += (x - y).abs();
            n += 1;
        }
    }
    s / n as f64
}

/// Dense forward-difference matrices `(D_h, D_v)` for a `w × h` image,
/// built entry by entry from the definition.
pub fn dense_differences(w: usize, h: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = w * h;
    let mut dh = DMatrix::zeros(n, n);
    let mut dv = DMatrix::zeros(n, n);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                dh[(i, i + 1)] = 1.0;
                dh[(i, i)] = -1.0;
            }
            if y + 1 < h {
                dv[(i, i + w)] = 1.0;
                dv[(i, i)] = -1.0;
            }
        }
    }
    (dh, dv)
}

pub fn to_vector(img: &PlanarImage) -> DVector<f64> {
    DVector::from_column_slice(img.data())
}

// ---- brute-force oracles ----

pub fn naive_median(img: &PlanarImage, r: usize) -> PlanarImage {
    let (w, h) = img.dims();
    PlanarImage::from_fn(w, h, |x, y| {
        let mut vals = Vec::new();
        for dy in -(r as isize)..=r as isize {
            for dx in -(r as isize)..=r as isize {
                let xx = (x as isize + dx).max(0).min(w as isize - 1) as usize;
                let yy = (y as isize + dy).max(0).min(h as isize - 1) as usize;
                vals.push(img.get(xx, yy));
            }
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals[vals.len() / 2]
    })
}

pub fn naive_bilateral(img: &PlanarImage, sigma: &PlanarImage, p: &DenoiseParams) -> PlanarImage {
    let (w, h) = img.dims();
    let r = p.abf_window_radius as isize;
    PlanarImage::from_fn(w, h, |x, y| {
        let sr = sigma.get(x, y).max(p.abf_range_sigma_min).min(p.abf_range_sigma_max);
        let c = img.get(x, y);
        let (mut num, mut den) = (0.0, 0.0);
        for dy in -r..=r {
            for dx in -r..=r {
                let (qx, qy) = (x as isize + dx, y as isize + dy);
                if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                    continue;
                }
                let v = img.get(qx as usize, qy as usize);
                let ws = (-((dx * dx + dy * dy) as f64) / (2.0 * p.abf_spatial_sigma.powi(2))).exp();
                let wr = (-(v - c).powi(2) / (2.0 * sr * sr)).exp();
                num += ws * wr * v;
                den += ws * wr;
            }
        }
        num / den
    })
}

pub fn perturbations(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let d: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            d.into_iter().map(|v| v / norm * 1e-3).collect()
        })
        .collect()
}

/// Dense solve of `(I + β Σ DᵀD) r = r̂ + β Σ Dᵀ g` with `g` thresholded
/// by hand from forward differences of `s`.
pub fn dense_reflectance(rhat: &PlanarImage, s: &PlanarImage, p: &ReflectanceParams) -> Vec<f64> {
    let (w, h) = s.dims();
    let (dh, dv) = dense_differences(w, h);
    let sv = to_vector(s);
    let threshold = |g: DVector<f64>| g.map(|d| if d.abs() < p.eps_g { 0.0 } else { p.lambda * d });
    let gh = threshold(&dh * &sv);
    let gv = threshold(&dv * &sv);
    let a = DMatrix::identity(w * h, w * h) + p.beta * (dh.transpose() * &dh + dv.transpose() * &dv);
    let b = to_vector(rhat) + p.beta * (dh.transpose() * gh + dv.transpose() * gv);
    solve_dense_oracle(&a, b.as_slice()).unwrap()
}


/// Dense solve of `(I + Σ D_dᵀ Diag(a_d) D_d) l = l̂` with
/// `a_d = α / (|D_d l̂| + ε)` evaluated by hand.
pub fn dense_illumination(lhat: &PlanarImage, alpha: f64, eps: f64) -> Vec<f64> {
    let (w, h) = lhat.dims();
    let (dh, dv) = dense_differences(w, h);
    let lv = to_vector(lhat);
    let weights = |g: DVector<f64>| DMatrix::from_diagonal(&g.map(|d| alpha / (d.abs() + eps)));
    let ah = weights(&dh * &lv);
    let av = weights(&dv * &lv);
    let a = DMatrix::identity(w * h, w * h) + dh.transpose() * ah * &dh + dv.transpose() * av * &dv;
    solve_dense_oracle(&a, lhat.data()).unwrap()
}

/// Two-frequency sinusoidal texture with a colour cast; nearly every forward
/// difference sits above the default gradient threshold.
pub fn texture(w: usize, h: usize) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        let v = 0.5 + 0.3 * (x as f64 * 0.7).sin() * (y as f64 * 0.5).cos();
        [v, 0.8 * v, 0.6 * v]
    })
}
