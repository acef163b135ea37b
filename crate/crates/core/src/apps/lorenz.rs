//! Quaternion FIR filter identification on Lorenz trajectories.
//!
//! The three Lorenz states ride on `i`, `j`, `k`. The input is the target
//! delayed by `delay` samples plus channelwise Gaussian noise, and the taps
//! solve the square Toeplitz system `X w = Y` with `X[p, q] = x(t + p − q)`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::rng::GaussianStream;
use crate::solvers::{spectral_alpha, DivergenceGuard, SolverReport};
use crate::{QMat, Quat};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub beta: f64,
    pub rho: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self { sigma: 10.0, beta: 8.0 / 3.0, rho: 28.0 }
    }
}

impl LorenzParams {
    fn rhs(&self, s: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = s;
        [self.sigma * (y - x), x * (self.rho - z) - y, x * y - self.beta * z]
    }
}

/// Classical RK4 with fixed step `dt`; returns `steps + 1` states.
pub fn integrate_lorenz(params: &LorenzParams, init: [f64; 3], dt: f64, steps: usize) -> Vec<[f64; 3]> {
    let add = |a: [f64; 3], b: [f64; 3], t: f64| [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]];
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = init;
    out.push(s);
    for _ in 0..steps {
        let k1 = params.rhs(s);
        let k2 = params.rhs(add(s, k1, dt / 2.0));
        let k3 = params.rhs(add(s, k2, dt / 2.0));
        let k4 = params.rhs(add(s, k3, dt));
        for c in 0..3 {
            s[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        out.push(s);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct LorenzProblem {
    /// System size `N` (`N` taps, `N` equations).
    pub n: usize,
    pub t_end: f64,
    pub params: LorenzParams,
    pub init: [f64; 3],
    /// Noise standard deviation as a fraction of each channel's std.
    pub noise_level: f64,
    pub seed: u64,
    pub delay: usize,
}

impl LorenzProblem {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            t_end: 10.0,
            params: LorenzParams::default(),
            init: [1.0, 1.0, 1.0],
            noise_level: 0.01,
            seed: 0,
            delay: 1,
        }
    }

    /// Samples on the time grid: `2N − 1` input lags plus the delay.
    pub fn samples(&self) -> usize {
        2 * self.n - 1 + self.delay
    }

    pub fn dt(&self) -> f64 {
        self.t_end / (self.samples() - 1) as f64
    }
}

#[derive(Clone, Debug)]
pub struct LorenzSystem {
    pub x: QMat,
    pub y: QMat,
    /// Noise-free states on the full sample grid.
    pub truth: Vec<[f64; 3]>,
    /// Noisy input sequence, one entry per lag index.
    pub input: Vec<Quat>,
    pub dt: f64,
}

/// Largest RK4 substep used between samples.
const MAX_SUBSTEP: f64 = 0.005;

pub fn lorenz_build(p: &LorenzProblem) -> Result<LorenzSystem> {
    if p.n < 2 {
        return Err(Error::InvalidConfig(format!("Lorenz system size must be at least 2, got {}", p.n)));
    }
    if !(p.t_end > 0.0) || !(p.noise_level >= 0.0) {
        return Err(Error::InvalidConfig("Lorenz horizon must be positive and noise nonnegative".into()));
    }
    let n = p.n;
    let samples = p.samples();
    let dt = p.dt();
    let sub = (dt / MAX_SUBSTEP).ceil().max(1.0) as usize;
    let fine = integrate_lorenz(&p.params, p.init, dt / sub as f64, (samples - 1) * sub);
    let truth: Vec<[f64; 3]> = fine.iter().step_by(sub).copied().collect();

    let mut std = [0.0; 3];
    for (c, sd) in std.iter_mut().enumerate() {
        let mean = truth.iter().map(|s| s[c]).sum::<f64>() / samples as f64;
        *sd = (truth.iter().map(|s| (s[c] - mean).powi(2)).sum::<f64>() / samples as f64).sqrt();
    }
    let mut g = GaussianStream::new(p.seed);
    let lags = 2 * n - 1;
    let input: Vec<Quat> = (0..lags)
        .map(|s| {
            let v = truth[s];
            let mut e = [0.0; 3];
            for c in 0..3 {
                e[c] = v[c] + p.noise_level * std[c] * g.normal();
            }
            Quat::new(0.0, e[0], e[1], e[2])
        })
        .collect();
    // Lag index of x(t + p − q) is (N − 1) + p − q; y(t + p) sits `delay` later.
    let x = QMat::from_fn(n, n, |r, c| input[n - 1 + r - c]);
    let y = QMat::from_fn(n, 1, |r, _| {
        let v = truth[n - 1 + r + p.delay];
        Quat::new(0.0, v[0], v[1], v[2])
    });
    Ok(LorenzSystem { x, y, truth, input, dt })
}

#[derive(Clone, Debug)]
pub struct LorenzFit {
    pub w: QMat,
    /// `‖X w − Y‖₂ / ‖Y‖₂`
    pub relres: f64,
    pub report: SolverReport,
}

const DAMPING: f64 = 0.5;

/// Newton–Schulz inverse `Z ← Z(2I − XZ)` from `Z₀ = αXᴴ`, `α = 0.99/est(‖X‖₂)²`,
/// returning `w = Z Y`. While the estimated `‖I − XZ‖₂` is at least one the
/// damped step `Z ← Z + γZ(I − XZ)` is taken instead. Stops when
/// `RelRes ≤ tol`; the history records `‖I − XZ_k‖_F`.
pub fn lorenz_solve_ns(x: &QMat, y: &QMat, tol: f64, maxit: usize) -> Result<LorenzFit> {
    let n = x.rows();
    if !x.is_square() || y.rows() != n {
        return Err(Error::dims("lorenz_solve_ns", x.shape(), y.shape()));
    }
    let start = Instant::now();
    let mut report = SolverReport::new("ns-q", (n, n), None);
    let ynorm = y.fro_norm();
    let relres_of = |z: &QMat| -> Result<(QMat, f64)> {
        let w = z.matmul(y)?;
        let r = x.matmul(&w)?.sub(y)?.fro_norm();
        Ok((w, if ynorm > 0.0 { r / ynorm } else { r }))
    };
    let mut z = x.adjoint().scale(spectral_alpha(x));
    let mut e = x.matmul(&z)?.identity_minus()?;
    let e0 = e.fro_norm();
    report.push(0, e0);
    let mut guard = DivergenceGuard::new(e0);
    let mut damped = e.op_norm_est(20, 7) >= 1.0;
    let (mut w, mut relres) = relres_of(&z)?;
    report.converged = relres <= tol;
    let mut k = 0;
    while !report.converged && k < maxit {
        k += 1;
        let step = z.matmul(&e)?;
        z.axpy(if damped { DAMPING } else { 1.0 }, &step)?;
        e = x.matmul(&z)?.identity_minus()?;
        let en = e.fro_norm();
        report.push(k, en);
        guard.check(k, en)?;
        if damped {
            damped = e.op_norm_est(20, 7) >= 1.0;
        }
        (w, relres) = relres_of(&z)?;
        report.converged = relres <= tol;
    }
    report.iterations = k;
    report.finish(x, &z, start.elapsed())?;
    Ok(LorenzFit { w, relres, report })
}
