//! Non-blind Tikhonov deblurring under circular boundary conditions.
//!
//! The blur `B = h ∗ X + N` is diagonal in the 2-D Fourier basis, so the
//! regularized solution is `X̂ = conj(ĥ) B̂ / T` with `T = |ĥ|² + λ` at every
//! frequency. The reciprocal `1/T` is computed by scalar Newton–Schulz from
//! `y₀ = 2/(min T + max T)`, and the exact division is kept as an oracle.

use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::apps::fft::{fft2, ifft2};
use crate::apps::image::psnr;
use crate::error::{Error, Result};
use crate::rng::GaussianStream;
use crate::{QMat, Quat};

/// Square real kernel of side `2·radius + 1`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub radius: usize,
    pub data: Vec<f64>,
}

impl Kernel {
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Tap at offset `(di, dj)` from the centre.
    pub fn at(&self, di: i64, dj: i64) -> f64 {
        let r = self.radius as i64;
        self.data[((di + r) as usize) * self.side() + (dj + r) as usize]
    }
}

/// Normalized Gaussian kernel `exp(−(i² + j²)/(2σ²))` on `[−r, r]²`.
pub fn gaussian_psf(radius: usize, sigma: f64) -> Result<Kernel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("PSF sigma must be positive, got {sigma}")));
    }
    let r = radius as i64;
    let mut data = Vec::with_capacity((2 * radius + 1).pow(2));
    for i in -r..=r {
        for j in -r..=r {
            data.push((-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let s: f64 = data.iter().sum();
    data.iter_mut().for_each(|v| *v /= s);
    Ok(Kernel { radius, data })
}

/// `ĥ` of the kernel wrapped onto an `h × w` torus with its centre at `(0, 0)`.
pub fn transfer_function(k: &Kernel, h: usize, w: usize) -> Result<Vec<Complex64>> {
    if k.side() > h || k.side() > w {
        return Err(Error::InvalidConfig(format!("PSF side {} exceeds the {h}x{w} grid", k.side())));
    }
    let r = k.radius as i64;
    let mut grid = vec![Complex64::new(0.0, 0.0); h * w];
    for di in -r..=r {
        for dj in -r..=r {
            let i = di.rem_euclid(h as i64) as usize;
            let j = dj.rem_euclid(w as i64) as usize;
            grid[i * w + j] += Complex64::new(k.at(di, dj), 0.0);
        }
    }
    fft2(&mut grid, h, w)?;
    Ok(grid)
}

/// Scalar Newton–Schulz `y ← y(2 − T y)` for all entries of `t` at once,
/// stopping when `max |1 − T y| ≤ tol`. Returns `(y, iterations, residual)`.
pub fn reciprocal_ns(t: &[f64], y0: f64, tol: f64, maxit: usize) -> (Vec<f64>, usize, f64) {
    let mut y = vec![y0; t.len()];
    let resid = |y: &[f64]| t.iter().zip(y).map(|(&ti, &yi)| (1.0 - ti * yi).abs()).fold(0.0, f64::max);
    let mut r = resid(&y);
    let mut k = 0;
    while r > tol && k < maxit {
        for (yi, &ti) in y.iter_mut().zip(t) {
            *yi *= 2.0 - ti * *yi;
        }
        k += 1;
        r = resid(&y);
    }
    (y, k, r)
}

#[derive(Clone, Debug)]
pub struct DeblurProblem {
    pub image: QMat,
    pub psf_radius: usize,
    pub psf_sigma: f64,
    /// Per-channel signal-to-noise ratio; `+∞` adds no noise.
    pub snr_db: f64,
    pub lambda: f64,
    pub tol: f64,
    pub maxit: usize,
    pub seed: u64,
}

impl DeblurProblem {
    pub fn new(image: QMat) -> Self {
        Self { image, psf_radius: 4, psf_sigma: 1.0, snr_db: 40.0, lambda: 0.05, tol: 1e-12, maxit: 100, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct DeblurOutput {
    pub blurred: QMat,
    pub restored: QMat,
    pub closed_form: QMat,
    pub iterations: usize,
    /// `max |1 − T y|` over frequencies at exit.
    pub residual: f64,
    pub psnr_blurred: f64,
    pub psnr_restored: f64,
    pub psnr_closed_form: f64,
    /// Time spent in the reciprocal iteration and the inverse transforms.
    pub wall_time: Duration,
}

fn channel(img: &QMat, c: usize) -> Vec<f64> {
    img.data()
        .iter()
        .map(|q| match c {
            0 => q.b,
            1 => q.c,
            _ => q.d,
        })
        .collect()
}

fn assemble(channels: &[Vec<f64>; 3], h: usize, w: usize, stride: usize) -> QMat {
    QMat::from_fn(h, w, |i, j| {
        let p = i * stride + j;
        Quat::new(0.0, channels[0][p], channels[1][p], channels[2][p])
    })
}

fn pad_replicate(img: &QMat, h: usize, w: usize) -> QMat {
    let (h0, w0) = img.shape();
    QMat::from_fn(h, w, |i, j| img[(i.min(h0 - 1), j.min(w0 - 1))])
}

fn real_ifft(spec: &[Complex64], h: usize, w: usize) -> Result<Vec<f64>> {
    let mut buf = spec.to_vec();
    ifft2(&mut buf, h, w)?;
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// Synthesizes the blurred, noisy observation and restores it both by the
/// Newton–Schulz reciprocal and by exact division. Images whose sides are not
/// powers of two are replicate-padded for the transforms and cropped back.
pub fn deblur_fft_ns(p: &DeblurProblem) -> Result<DeblurOutput> {
    let (h0, w0) = p.image.shape();
    if h0 == 0 || w0 == 0 {
        return Err(Error::InvalidConfig("empty image".into()));
    }
    if !(p.lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be positive, got {}", p.lambda)));
    }
    let (h, w) = (h0.next_power_of_two(), w0.next_power_of_two());
    let padded = pad_replicate(&p.image, h, w);
    let kernel = gaussian_psf(p.psf_radius, p.psf_sigma)?;
    let hhat = transfer_function(&kernel, h, w)?;
    let mut noise = GaussianStream::new(p.seed);

    let mut observed_hat: Vec<Vec<Complex64>> = Vec::with_capacity(3);
    let mut blurred: [Vec<f64>; 3] = Default::default();
    for (c, out) in blurred.iter_mut().enumerate() {
        let mut spec: Vec<Complex64> = channel(&padded, c).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        fft2(&mut spec, h, w)?;
        spec.iter_mut().zip(&hhat).for_each(|(s, k)| *s *= k);
        let mut b = real_ifft(&spec, h, w)?;
        if p.snr_db.is_finite() {
            let power = b.iter().map(|v| v * v).sum::<f64>() / b.len() as f64;
            let sd = (power / 10f64.powf(p.snr_db / 10.0)).sqrt();
            b.iter_mut().for_each(|v| *v += sd * noise.normal());
        }
        let mut bh: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2(&mut bh, h, w)?;
        observed_hat.push(bh);
        *out = b;
    }

    let start = Instant::now();
    let t: Vec<f64> = hhat.iter().map(|z| z.norm_sqr() + p.lambda).collect();
    let (tmin, tmax) = t.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (y, iterations, residual) = reciprocal_ns(&t, 2.0 / (tmin + tmax), p.tol, p.maxit);
    let mut restored: [Vec<f64>; 3] = Default::default();
    for (c, out) in restored.iter_mut().enumerate() {
        let spec: Vec<Complex64> =
            observed_hat[c].iter().zip(&hhat).zip(&y).map(|((b, k), &yi)| k.conj() * b * yi).collect();
        *out = real_ifft(&spec, h, w)?;
    }
    let wall_time = start.elapsed();

    let mut closed: [Vec<f64>; 3] = Default::default();
    for (c, out) in closed.iter_mut().enumerate() {
        let spec: Vec<Complex64> =
            observed_hat[c].iter().zip(&hhat).zip(&t).map(|((b, k), &ti)| k.conj() * b / ti).collect();
        *out = real_ifft(&spec, h, w)?;
    }

    let blurred = assemble(&blurred, h0, w0, w);
    let restored = assemble(&restored, h0, w0, w);
    let closed_form = assemble(&closed, h0, w0, w);
    Ok(DeblurOutput {
        psnr_blurred: psnr(&p.image, &blurred)?,
        psnr_restored: psnr(&p.image, &restored)?,
        psnr_closed_form: psnr(&p.image, &closed_form)?,
        blurred,
        restored,
        closed_form,
        iterations,
        residual,
        wall_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::image::synthetic_image;

    #[test]
    fn psf_examples() {
        let k = gaussian_psf(0, 1.0).unwrap();
        assert_eq!(k.data, vec![1.0]);
        let k = gaussian_psf(4, 1.0).unwrap();
        assert_eq!(k.side(), 9);
        assert!((k.data.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in -4..=4 {
            for j in -4..=4 {
                assert_eq!(k.at(i, j), k.at(j, i));
                assert_eq!(k.at(i, j), k.at(-i, -j));
            }
        }
        assert!(gaussian_psf(2, 0.0).is_err());
    }

    #[test]
    fn scalar_reciprocal_iteration() {
        let (y, _, _) = reciprocal_ns(&[1.0, 3.0], 0.5, 0.0, 1);
        assert_eq!(y, vec![0.75, 0.25]);
        let (y, k, r) = reciprocal_ns(&[1.0, 3.0], 0.5, 1e-15, 100);
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(k < 10 && r <= 1e-15);
    }

    #[test]
    fn centred_psf_has_real_spectrum() {
        let k = gaussian_psf(2, 1.0).unwrap();
        let hh = transfer_function(&k, 16, 16).unwrap();
        assert!(hh.iter().all(|z| z.im.abs() < 1e-14));
        assert!((hh[0].re - 1.0).abs() < 1e-14);
        assert!(transfer_function(&gaussian_psf(9, 1.0).unwrap(), 16, 16).is_err());
    }

    #[test]
    fn identity_psf_returns_input() {
        let img = synthetic_image(16, 16);
        let p = DeblurProblem { psf_radius: 0, lambda: 1e-12, snr_db: f64::INFINITY, ..DeblurProblem::new(img.clone()) };
        let out = deblur_fft_ns(&p).unwrap();
        assert!(out.restored.sub(&img).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn matches_closed_form_and_large_lambda_hurts() {
        let img = synthetic_image(32, 32);
        let p = DeblurProblem { lambda: 0.02, ..DeblurProblem::new(img.clone()) };
        let out = deblur_fft_ns(&p).unwrap();
        assert!(out.restored.rel_diff(&out.closed_form).unwrap() <= 1e-10);
        assert!((out.psnr_restored - out.psnr_closed_form).abs() <= 0.01);
        let big = deblur_fft_ns(&DeblurProblem { lambda: 50.0, ..p }).unwrap();
        assert!(big.psnr_restored < out.psnr_restored);
    }

    #[test]
    fn odd_sizes_are_padded() {
        let img = synthetic_image(20, 24);
        let out = deblur_fft_ns(&DeblurProblem::new(img)).unwrap();
        assert_eq!(out.restored.shape(), (20, 24));
        assert!(out.restored.rel_diff(&out.closed_form).unwrap() <= 1e-10);
    }
}
