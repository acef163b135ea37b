//! Iterative radix-2 Cooley–Tukey transforms. The forward transform is
//! unnormalized; the inverse divides by the length, so Parseval reads
//! `‖x‖² = ‖x̂‖² / len`.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_len(n: usize) -> Result<()> {
    if n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NonPowerOfTwo(n))
    }
}

fn transform(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * std::f64::consts::PI / len as f64;
        let half = len / 2;
        // Twiddles from direct evaluation keep the error independent of len.
        let tw: Vec<Complex64> = (0..half).map(|k| Complex64::from_polar(1.0, ang * k as f64)).collect();
        for chunk in buf.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let t = hi[k] * tw[k];
                hi[k] = lo[k] - t;
                lo[k] += t;
            }
        }
        len <<= 1;
    }
}

pub fn fft(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    transform(buf, false);
    Ok(())
}

pub fn ifft(buf: &mut [Complex64]) -> Result<()> {
    check_len(buf.len())?;
    transform(buf, true);
    let s = 1.0 / buf.len() as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    Ok(())
}

fn transform2(data: &mut [Complex64], h: usize, w: usize, inverse: bool) -> Result<()> {
    check_len(h)?;
    check_len(w)?;
    if data.len() != h * w {
        return Err(Error::dims("fft2", (h, w), (data.len(), 1)));
    }
    for row in data.chunks_exact_mut(w) {
        transform(row, inverse);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); h];
    for j in 0..w {
        for i in 0..h {
            col[i] = data[i * w + j];
        }
        transform(&mut col, inverse);
        for i in 0..h {
            data[i * w + j] = col[i];
        }
    }
    if inverse {
        let s = 1.0 / (h * w) as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }
    Ok(())
}

/// In-place 2-D transform of a row-major `h × w` grid.
pub fn fft2(data: &mut [Complex64], h: usize, w: usize) -> Result<()> {
    transform2(data, h, w, false)
}

pub fn ifft2(data: &mut [Complex64], h: usize, w: usize) -> Result<()> {
    transform2(data, h, w, true)
}

/// Forward transform of a real grid.
pub fn fft2_real(data: &[f64], h: usize, w: usize) -> Result<Vec<Complex64>> {
    let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft2(&mut buf, h, w)?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianStream;

    fn dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(t, &v)| v * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut g = GaussianStream::new(seed);
        (0..n).map(|_| Complex64::new(g.normal(), g.normal())).collect()
    }

    #[test]
    fn matches_direct_dft() {
        for n in [1, 2, 8, 32] {
            let x = random(n, n as u64);
            let mut y = x.clone();
            fft(&mut y).unwrap();
            let want = dft(&x);
            for (a, b) in y.iter().zip(&want) {
                assert!((a - b).norm() < 1e-12 * n as f64);
            }
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let mut d = vec![0.0; 64];
        d[0] = 1.0;
        let s = fft2_real(&d, 8, 8).unwrap();
        assert!(s.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn roundtrip_and_parseval() {
        let x = random(256, 3);
        let mut y = x.clone();
        fft2(&mut y, 16, 16).unwrap();
        let ex: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ey: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        assert!((ex - ey / 256.0).abs() <= 1e-10 * ex);
        ifft2(&mut y, 16, 16).unwrap();
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * ex.sqrt());
    }

    #[test]
    fn rejects_other_lengths() {
        let mut v = vec![Complex64::new(0.0, 0.0); 6];
        assert!(matches!(fft(&mut v), Err(Error::NonPowerOfTwo(6))));
        assert!(matches!(fft2(&mut v, 2, 3), Err(Error::NonPowerOfTwo(3))));
        assert!(fft2(&mut v, 2, 2).is_err());
    }
}
