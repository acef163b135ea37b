//! Colour images as pure-quaternion fields, PPM (P6) I/O, PSNR and Gaussian
//! smoothing.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::{QMat, Quat};

/// PSNR reported for identical images.
pub const PSNR_CAP_DB: f64 = 200.0;

/// `10·log10(1/MSE)` over the `i`, `j`, `k` components, capped at 200 dB.
pub fn psnr(reference: &QMat, test: &QMat) -> Result<f64> {
    if reference.shape() != test.shape() {
        return Err(Error::dims("psnr", reference.shape(), test.shape()));
    }
    let count = 3 * reference.data().len();
    if count == 0 {
        return Ok(PSNR_CAP_DB);
    }
    let sse: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(r, t)| (r.b - t.b).powi(2) + (r.c - t.c).powi(2) + (r.d - t.d).powi(2))
        .sum();
    let mse = sse / count as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}

fn kernel_1d(sigma: f64) -> Vec<f64> {
    let radius = (2.0 * sigma).ceil() as i64;
    let w: Vec<f64> = (-radius..=radius).map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable Gaussian filter on every quaternion component, kernel size
/// `2⌈2σ⌉ + 1`, replicate boundary.
pub fn gaussian_smooth(img: &QMat, sigma: f64) -> Result<QMat> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("smoothing sigma must be positive, got {sigma}")));
    }
    let (h, w) = img.shape();
    if h == 0 || w == 0 {
        return Ok(img.clone());
    }
    let k = kernel_1d(sigma);
    let r = (k.len() / 2) as i64;
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;
    let rows = QMat::from_fn(h, w, |i, j| {
        k.iter().enumerate().map(|(t, &kv)| img[(i, clamp(j as i64 + t as i64 - r, w))].scale(kv)).sum()
    });
    Ok(QMat::from_fn(h, w, |i, j| {
        k.iter().enumerate().map(|(t, &kv)| rows[(clamp(i as i64 + t as i64 - r, h), j)].scale(kv)).sum()
    }))
}

/// Deterministic piecewise-smooth test image: a colour gradient background
/// with a disc and a rectangle of constant colour.
pub fn synthetic_image(h: usize, w: usize) -> QMat {
    let (hf, wf) = (h.max(1) as f64, w.max(1) as f64);
    QMat::from_fn(h, w, |i, j| {
        let (y, x) = (i as f64 / hf, j as f64 / wf);
        let mut rgb = [
            0.2 + 0.5 * x,
            0.3 + 0.4 * y,
            0.5 + 0.3 * (2.0 * std::f64::consts::PI * (x + 0.5 * y)).sin() * 0.5,
        ];
        if (x - 0.35).powi(2) + (y - 0.4).powi(2) < 0.04 {
            rgb = [0.9, 0.2, 0.15];
        }
        if (0.55..0.85).contains(&x) && (0.6..0.8).contains(&y) {
            rgb = [0.1, 0.25, 0.8];
        }
        Quat::new(0.0, rgb[0], rgb[1], rgb[2])
    })
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse("truncated PPM header".into()));
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("bad PPM {what}")))
}

/// Parses a binary P6 image with maxval ≤ 255 into `[0, 1]` channels.
pub fn decode_ppm(bytes: &[u8]) -> Result<QMat> {
    let mut pos = 0;
    if next_token(bytes, &mut pos)? != b"P6" {
        return Err(Error::Parse("not a P6 PPM".into()));
    }
    let w = header_number(bytes, &mut pos, "width")?;
    let h = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!("unsupported PPM maxval {maxval}")));
    }
    pos += 1;
    let body = bytes.get(pos..pos + 3 * w * h).ok_or_else(|| Error::Parse("truncated PPM pixel data".into()))?;
    let s = 1.0 / maxval as f64;
    Ok(QMat::from_fn(h, w, |i, j| {
        let p = &body[3 * (i * w + j)..];
        Quat::new(0.0, p[0] as f64 * s, p[1] as f64 * s, p[2] as f64 * s)
    }))
}

/// Encodes the `i`, `j`, `k` channels, clamped to `[0, 1]`, as 8-bit P6.
pub fn encode_ppm(img: &QMat) -> Vec<u8> {
    let (h, w) = img.shape();
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    for p in img.data() {
        out.extend_from_slice(&[q(p.b), q(p.c), q(p.d)]);
    }
    out
}

pub fn read_ppm(path: impl AsRef<Path>) -> Result<QMat> {
    decode_ppm(&fs::read(path)?)
}

pub fn write_ppm(path: impl AsRef<Path>, img: &QMat) -> Result<()> {
    fs::write(path, encode_ppm(img))?;
    Ok(())
}
