//! Image containers, HSV conversion, luminance initialization and file I/O.

use std::path::Path;

use image::{ColorType, ImageError, ImageReader};

use crate::error::{NatleError, Result};

/// Rec. 601 luma weights used for the illumination initialization.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Single-channel, row-major `f64` map.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl PlanarImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(NatleError::DimensionMismatch {
                expected: (width, height),
                actual: (data.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// `(width, height)`
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sample with coordinates clamped into the image (replicate boundary).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.data[yc * self.width + xc]
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Self {
        self.map(|v| v.clamp(lo, hi))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(NatleError::DimensionMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }
}

/// Three equally sized planes holding red, green and blue in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub r: PlanarImage,
    pub g: PlanarImage,
    pub b: PlanarImage,
}

impl RgbImage {
    pub fn new(r: PlanarImage, g: PlanarImage, b: PlanarImage) -> Result<Self> {
        r.ensure_same_dims(&g)?;
        r.ensure_same_dims(&b)?;
        Ok(Self { r, g, b })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let n = width * height;
        let (mut r, mut g, mut b) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for y in 0..height {
            for x in 0..width {
                let [pr, pg, pb] = f(x, y);
                r.push(pr);
                g.push(pg);
                b.push(pb);
            }
        }
        Self {
            r: PlanarImage { width, height, data: r },
            g: PlanarImage { width, height, data: g },
            b: PlanarImage { width, height, data: b },
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.r.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.r.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.r.dims()
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        [self.r.get(x, y), self.g.get(x, y), self.b.get(x, y)]
    }

    pub fn channels(&self) -> [&PlanarImage; 3] {
        [&self.r, &self.g, &self.b]
    }

    pub fn map_channels(&self, mut f: impl FnMut(&PlanarImage) -> PlanarImage) -> Self {
        Self {
            r: f(&self.r),
            g: f(&self.g),
            b: f(&self.b),
        }
    }

    pub fn clamp(&self) -> Self {
        self.map_channels(|c| c.clamp(0.0, 1.0))
    }

    pub fn all_finite(&self) -> bool {
        self.channels().iter().all(|c| c.all_finite())
    }

    /// Mean over all three channels.
    pub fn mean(&self) -> f64 {
        (self.r.mean() + self.g.mean() + self.b.mean()) / 3.0
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        self.r.ensure_same_dims(&other.r)
    }
}

/// Hexcone HSV planes. Hue is a normalized angle in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    pub h: PlanarImage,
    pub s: PlanarImage,
    pub v: PlanarImage,
}

impl HsvImage {
    pub fn new(h: PlanarImage, s: PlanarImage, v: PlanarImage) -> Result<Self> {
        h.ensure_same_dims(&s)?;
        h.ensure_same_dims(&v)?;
        Ok(Self { h, s, v })
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.v.dims()
    }
}

pub fn rgb_to_hsv_pixel([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    if delta <= 0.0 {
        return [0.0, 0.0, max];
    }
    let sector = if max == r {
        (g - b) / delta
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let mut h = sector / 6.0;
    if h < 0.0 {
        h += 1.0;
    }
    if h >= 1.0 {
        h = 0.0;
    }
    let s = if max > 0.0 { delta / max } else { 0.0 };
    [h, s, max]
}

pub fn hsv_to_rgb_pixel([h, s, v]: [f64; 3]) -> [f64; 3] {
    if s <= 0.0 {
        return [v, v, v];
    }
    let h6 = (h - h.floor()) * 6.0;
    let sector = h6.floor();
    let f = h6 - sector;
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector as u8 % 6 {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

pub fn rgb_to_hsv(img: &RgbImage) -> HsvImage {
    let (w, h) = img.dims();
    let n = w * h;
    let (mut hue, mut sat, mut val) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for i in 0..n {
        let [ph, ps, pv] = rgb_to_hsv_pixel([img.r.data[i], img.g.data[i], img.b.data[i]]);
        hue.push(ph);
        sat.push(ps);
        val.push(pv);
    }
    HsvImage {
        h: PlanarImage { width: w, height: h, data: hue },
        s: PlanarImage { width: w, height: h, data: sat },
        v: PlanarImage { width: w, height: h, data: val },
    }
}

pub fn hsv_to_rgb(img: &HsvImage) -> RgbImage {
    let (w, h) = img.dims();
    let n = w * h;
    let (mut r, mut g, mut b) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for i in 0..n {
        let [pr, pg, pb] = hsv_to_rgb_pixel([img.h.data[i], img.s.data[i], img.v.data[i]]);
        r.push(pr);
        g.push(pg);
        b.push(pb);
    }
    RgbImage {
        r: PlanarImage { width: w, height: h, data: r },
        g: PlanarImage { width: w, height: h, data: g },
        b: PlanarImage { width: w, height: h, data: b },
    }
}

/// Luma-weighted initial illumination `0.299 R + 0.587 G + 0.114 B`.
pub fn init_illumination(img: &RgbImage) -> PlanarImage {
    let [wr, wg, wb] = LUMA_WEIGHTS;
    let data = img
        .r
        .data
        .iter()
        .zip(&img.g.data)
        .zip(&img.b.data)
        .map(|((&r, &g), &b)| wr * r + wg * g + wb * b)
        .collect();
    PlanarImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

fn map_image_error(path: &Path, err: ImageError) -> NatleError {
    match err {
        ImageError::IoError(source) => NatleError::Unreadable {
            path: path.to_path_buf(),
            source,
        },
        ImageError::Limits(e) => NatleError::DimensionOverflow {
            path: path.to_path_buf(),
            message: e.to_string(),
        },
        other => NatleError::Format {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}

/// Load a PNG or JPEG as normalized RGB. Alpha is dropped; 16-bit data is
/// scaled by 1/65535, everything else by 1/255.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|source| NatleError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?
        .with_guessed_format()
        .map_err(|source| NatleError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
    let decoded = reader.decode().map_err(|e| map_image_error(path, e))?;

    let color = decoded.color();
    if color.has_alpha() {
        log::warn!("{}: dropping alpha channel", path.display());
    }
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    w.checked_mul(h)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| NatleError::DimensionOverflow {
            path: path.to_path_buf(),
            message: format!("{w}x{h}"),
        })?;

    let sixteen_bit = matches!(
        color,
        ColorType::L16 | ColorType::La16 | ColorType::Rgb16 | ColorType::Rgba16
    );
    if sixteen_bit {
        let buf = decoded.to_rgb16();
        Ok(RgbImage::from_fn(w, h, |x, y| {
            let p = buf.get_pixel(x as u32, y as u32).0;
            p.map(|c| f64::from(c) / 65535.0)
        }))
    } else {
        let buf = decoded.to_rgb8();
        Ok(RgbImage::from_fn(w, h, |x, y| {
            let p = buf.get_pixel(x as u32, y as u32).0;
            p.map(|c| f64::from(c) / 255.0)
        }))
    }
}

#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Write an 8-bit RGB PNG, clamping to `[0, 1]` and rounding.
pub fn save_image(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = img.dims();
    let mut buf = image::RgbImage::new(w as u32, h as u32);
    for (x, y, px) in buf.enumerate_pixels_mut() {
        let [r, g, b] = img.pixel(x as usize, y as usize);
        *px = image::Rgb([quantize_u8(r), quantize_u8(g), quantize_u8(b)]);
    }
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            ImageError::IoError(source) => NatleError::Unwritable {
                path: path.to_path_buf(),
                source,
            },
            other => NatleError::Format {
                path: path.to_path_buf(),
                message: other.to_string(),
            },
        })
}

/// Save a single map as an 8-bit gray PNG (used for trace panels).
pub fn save_planar(path: impl AsRef<Path>, img: &PlanarImage) -> Result<()> {
    save_image(path, &RgbImage::new(img.clone(), img.clone(), img.clone())?)
}
