//! Screenshot decoding and whole-image similarity metrics.
//!
//! All pixel metrics expect equally sized images; use [`pad_pair`] first.
//! Grayscale conversion everywhere is BT.601 luma.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::color::{srgb_to_lab, Lab};
use crate::error::{Error, Result};
use crate::resource::BoundingBox;

/// PSNR reported for identical images.
pub const PSNR_CAP: f64 = 100.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const DYNAMIC_RANGE: f64 = 255.0;

/// Row-major 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
}

impl RasterImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!("{width}x{height} has no pixels")));
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidImage(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        Self {
            width,
            height,
            pixels: vec![rgb; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        let pixels = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { width, height, pixels }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = rgb;
    }

    pub fn from_png_bytes(bytes: &[u8]) -> Result<Self> {
        let decoded = image::load_from_memory(bytes)?.to_rgb8();
        let (width, height) = decoded.dimensions();
        let pixels = decoded.pixels().map(|p| p.0).collect();
        Self::new(width, height, pixels)
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_png_bytes(&bytes)
    }

    pub fn to_png_bytes(&self) -> Result<Vec<u8>> {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let buffer = image::RgbImage::from_raw(self.width, self.height, raw).expect("buffer size matches dimensions");
        let mut out = std::io::Cursor::new(Vec::new());
        buffer.write_to(&mut out, image::ImageFormat::Png)?;
        Ok(out.into_inner())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_png_bytes()?)?;
        Ok(())
    }

    /// BT.601 luma per pixel, unrounded.
    pub fn luma(&self) -> Vec<f64> {
        self.pixels.iter().map(|&p| luma(p)).collect()
    }

    fn same_size(&self, other: &Self) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch(self.width, self.height, other.width, other.height));
        }
        Ok(())
    }
}

pub fn luma([r, g, b]: [u8; 3]) -> f64 {
    0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64
}

fn luma_level(p: [u8; 3]) -> usize {
    luma(p).round().clamp(0.0, 255.0) as usize
}

/// Pads both images to their common bounding size with seeded uniform noise.
///
/// Originals stay anchored at the top-left. Noise for `a` is drawn before
/// noise for `b`, row by row, from one generator seeded with `seed`.
pub fn pad_pair(a: &RasterImage, b: &RasterImage, seed: u64) -> (RasterImage, RasterImage) {
    if a.width == b.width && a.height == b.height {
        return (a.clone(), b.clone());
    }
    let width = a.width.max(b.width);
    let height = a.height.max(b.height);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pad = |img: &RasterImage| {
        RasterImage::from_fn(width, height, |x, y| {
            if x < img.width && y < img.height {
                img.get(x, y)
            } else {
                [rng.random(), rng.random(), rng.random()]
            }
        })
    };
    let pa = pad(a);
    let pb = pad(b);
    (pa, pb)
}

/// Mean absolute difference over all pixels and channels, in `[0, 255]`.
pub fn mae(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    a.same_size(b)?;
    let total: u64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(&u, &v)| u.abs_diff(v) as u64))
        .sum();
    Ok(total as f64 / (a.pixels.len() * 3) as f64)
}

pub fn mse(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    a.same_size(b)?;
    let total: u64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .flat_map(|(p, q)| {
            p.iter().zip(q).map(|(&u, &v)| {
                let d = u.abs_diff(v) as u64;
                d * d
            })
        })
        .sum();
    Ok(total as f64 / (a.pixels.len() * 3) as f64)
}

/// Peak signal-to-noise ratio in dB, capped at [`PSNR_CAP`].
pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    let mse = mse(a, b)?;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (DYNAMIC_RANGE * DYNAMIC_RANGE / mse).log10()).min(PSNR_CAP))
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, w) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *w = (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

/// Separable "valid" Gaussian filtering: output is `(w-10) x (h-10)`.
fn filter_valid(plane: &[f64], width: usize, height: usize, kernel: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = width - SSIM_WINDOW + 1;
    let oh = height - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * height];
    for y in 0..height {
        let line = &plane[y * width..(y + 1) * width];
        for x in 0..ow {
            rows[y * ow + x] = kernel.iter().zip(&line[x..x + SSIM_WINDOW]).map(|(k, v)| k * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = kernel.iter().enumerate().map(|(i, k)| k * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean structural similarity of the grayscale images.
///
/// Uses an 11x11 Gaussian window (sigma 1.5) over every fully contained
/// window position, with K1 = 0.01, K2 = 0.03 and L = 255.
pub fn ssim(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    a.same_size(b)?;
    let (w, h) = (a.width as usize, a.height as usize);
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            width: a.width,
            height: a.height,
            window: SSIM_WINDOW as u32,
        });
    }
    let kernel = gaussian_kernel();
    let x = a.luma();
    let y = b.luma();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(u, v)| u * v).collect();

    let mu_x = filter_valid(&x, w, h, &kernel);
    let mu_y = filter_valid(&y, w, h, &kernel);
    let e_xx = filter_valid(&xx, w, h, &kernel);
    let e_yy = filter_valid(&yy, w, h, &kernel);
    let e_xy = filter_valid(&xy, w, h, &kernel);

    let c1 = (SSIM_K1 * DYNAMIC_RANGE).powi(2);
    let c2 = (SSIM_K2 * DYNAMIC_RANGE).powi(2);
    let n = mu_x.len();
    let total: f64 = (0..n)
        .map(|i| {
            let (mx, my) = (mu_x[i], mu_y[i]);
            let var_x = e_xx[i] - mx * mx;
            let var_y = e_yy[i] - my * my;
            let cov = e_xy[i] - mx * my;
            ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (var_x + var_y + c2))
        })
        .sum();
    Ok(total / n as f64)
}

/// Wasserstein-1 distance between the grayscale intensity distributions.
///
/// Intensities are rounded to integer levels; each image carries unit mass.
pub fn intensity_emd(a: &RasterImage, b: &RasterImage) -> f64 {
    let hist = |img: &RasterImage| {
        let mut h = [0.0f64; 256];
        for &p in &img.pixels {
            h[luma_level(p)] += 1.0;
        }
        let n = img.pixels.len() as f64;
        h.iter_mut().for_each(|c| *c /= n);
        h
    };
    let (ha, hb) = (hist(a), hist(b));
    let (mut ca, mut cb, mut emd) = (0.0, 0.0, 0.0);
    for k in 0..255 {
        ca += ha[k];
        cb += hb[k];
        emd += (ca - cb).abs();
    }
    emd
}

/// Normalized EMD: `1 - EMD / EMD_max`, where `EMD_max` is the cost of
/// sending every reference pixel to its farthest level (0 or 255).
///
/// Not symmetric: the bound depends on `reference` only.
pub fn nemd(reference: &RasterImage, candidate: &RasterImage) -> Result<f64> {
    reference.same_size(candidate)?;
    let emd = intensity_emd(reference, candidate);
    let emd_max = reference
        .pixels
        .iter()
        .map(|&p| {
            let v = luma_level(p) as f64;
            v.max(DYNAMIC_RANGE - v)
        })
        .sum::<f64>()
        / reference.pixels.len() as f64;
    Ok((1.0 - emd / emd_max).clamp(0.0, 1.0))
}

/// An externally computed image embedding (e.g. CLIP).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) || values.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateEmbedding);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

/// Cosine similarity of two embeddings. Images are never padded for this.
pub fn clip_cosine(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64> {
    if a.0.len() != b.0.len() {
        return Err(Error::EmbeddingDimension(a.0.len(), b.0.len()));
    }
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    let na = a.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateEmbedding);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean color of the pixels covered by `bbox` (clamped to the image), in CIELAB.
///
/// Pixel `(i, j)` covers `[i, i+1) x [j, j+1)`; a pixel is included when the
/// box overlaps it with positive area.
pub fn mean_color_lab(img: &RasterImage, bbox: &BoundingBox) -> Result<Lab> {
    if !bbox.is_finite() {
        return Err(Error::EmptyRegion);
    }
    let b = bbox.clamped(img.width as f64, img.height as f64);
    let (x0, x1) = (b.x1.floor() as u32, b.x2.ceil() as u32);
    let (y0, y1) = (b.y1.floor() as u32, b.y2.ceil() as u32);
    if x0 >= x1 || y0 >= y1 {
        return Err(Error::EmptyRegion);
    }
    let mut sum = [0.0f64; 3];
    for y in y0..y1 {
        for x in x0..x1 {
            let p = img.get(x, y);
            for c in 0..3 {
                sum[c] += p[c] as f64;
            }
        }
    }
    let n = ((x1 - x0) * (y1 - y0)) as f64;
    Ok(srgb_to_lab([sum[0] / n, sum[1] / n, sum[2] / n]))
}
