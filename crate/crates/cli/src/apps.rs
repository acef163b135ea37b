use std::path::Path;
use std::time::{Duration, Instant};

use quatpinv::apps::{
    complete_with, deblur_fft_ns, lorenz_build, lorenz_solve_ns, psnr, read_ppm, synthetic_image, write_ppm,
    CompletionProblem, CurMode, DeblurProblem, LorenzProblem,
};
use quatpinv::factor::{pinv_normal_eq, pinv_qsvd, DEFAULT_RANK_TOL, DEFAULT_RIDGE};
use quatpinv::solvers::{ns_damped, SolverConfig};
use quatpinv::{Mask, QMat, Result};

use crate::args::Opts;
use crate::bench::{seeds, sizes};
use crate::output::{sibling, Outputs, APP_HEADER, APP_HISTORY_HEADER};
use crate::{usage, CliError};

pub const DEFAULT_CUR_SIZES: &[usize] = &[60];
pub const DEFAULT_LORENZ_SIZES: &[usize] = &[50, 75, 100, 150, 200];
pub const DEFAULT_DEBLUR_SIZES: &[usize] = &[32, 64, 128];

fn app_row(app: &str, params: &str, iters: usize, wall: Duration, psnr_db: Option<f64>, residual: f64) -> String {
    let p = psnr_db.map_or_else(String::new, |v| format!("{v:.4}"));
    format!("{app},{params},{iters},{:.6},{p},{residual:e}", wall.as_secs_f64())
}

type PinvFn = Box<dyn Fn(&QMat) -> Result<QMat>>;

fn pinv_backend(name: &str) -> Result<PinvFn, CliError> {
    Ok(match name {
        "ns" => Box::new(|a: &QMat| {
            let cfg = SolverConfig { tol: 1e-10, maxit: 500, ..Default::default() };
            ns_damped(a, &cfg).map(|(x, _)| x)
        }),
        "normal-eq" => Box::new(|a: &QMat| pinv_normal_eq(a, DEFAULT_RIDGE)),
        "qsvd" => Box::new(|a: &QMat| pinv_qsvd(a, DEFAULT_RANK_TOL)),
        other => return Err(usage(format!("unknown --pinv '{other}' (expected ns, normal-eq or qsvd)"))),
    })
}

fn cur_mode(opts: &Opts) -> Result<CurMode, CliError> {
    match opts.method.as_deref() {
        None => Ok(CurMode::UOpt),
        Some([m]) => match m.to_ascii_lowercase().as_str() {
            "uopt" | "u-opt" => Ok(CurMode::UOpt),
            "wpinv" | "w-pinv" => Ok(CurMode::WPinv),
            other => Err(usage(format!("unknown CUR mode '{other}' (expected uopt or wpinv)"))),
        },
        Some(_) => Err(usage("cur-complete takes a single --method")),
    }
}

/// Rank-`r` product of Gaussian factors scaled so its largest component is 1.
pub fn low_rank_truth(m: usize, n: usize, r: usize, seed: u64) -> QMat {
    let a = QMat::randn(m, r, seed).matmul(&QMat::randn(r, n, seed ^ 0x5bd1_e995)).expect("inner dimensions agree");
    let peak = a.max_abs();
    if peak > 0.0 { a.scale(1.0 / peak) } else { a }
}

pub fn cur_complete(opts: &Opts) -> Result<Outputs, CliError> {
    let mode = cur_mode(opts)?;
    let pinv = pinv_backend(&opts.pinv)?;
    if !(0.0..1.0).contains(&opts.missing) {
        return Err(usage("--missing must lie in [0, 1)"));
    }
    let image = opts.input.as_deref().map(read_ppm).transpose()?;
    let sizes = if image.is_some() { vec![0] } else { sizes(opts, DEFAULT_CUR_SIZES)? };
    let rounds = opts.maxit.unwrap_or(25);
    let app = match mode {
        CurMode::UOpt => "cur-uopt",
        CurMode::WPinv => "cur-wpinv",
    };
    let mut out = Outputs::new(APP_HEADER, APP_HISTORY_HEADER);
    for &n in &sizes {
        for &seed in &seeds(opts)? {
            let truth = match &image {
                Some(img) => img.clone(),
                None => low_rank_truth(n, n, opts.rank, seed),
            };
            let (m, n) = truth.shape();
            let mask = Mask::random(m, n, opts.missing, seed);
            let mut prob = CompletionProblem::new(truth.clone(), mask, opts.rank, rounds, seed)?;
            prob.mode = mode;
            prob.smoothing_sigma = opts.smooth_sigma;
            let params = format!("{m}x{n};r={};missing={};seed={seed}", opts.rank, opts.missing);
            let mut rows = Vec::new();
            let mut overhead = Duration::ZERO;
            let start = Instant::now();
            let x = complete_with(&prob, pinv.as_ref(), |round, x, res| {
                let t = Instant::now();
                let score = psnr(&truth, x).ok();
                rows.push((round, start.elapsed() - overhead, score, res));
                overhead += t.elapsed();
            })?;
            for (round, wall, score, res) in rows {
                out.push_row(app_row(app, &params, round, wall, score, res));
                out.push_history(format!("{app},{params},{round},{res:e}"));
            }
            if image.is_some() {
                if let Some(path) = &opts.out {
                    let tag = format!("-seed{seed}");
                    write_ppm(sibling(path, &format!("{tag}-original.ppm")), &truth)?;
                    write_ppm(sibling(path, &format!("{tag}-observed.ppm")), &prob.observed)?;
                    write_ppm(sibling(path, &format!("{tag}-completed.ppm")), &x)?;
                }
            }
        }
    }
    Ok(out)
}

pub fn lorenz(opts: &Opts) -> Result<Outputs, CliError> {
    let sizes = sizes(opts, DEFAULT_LORENZ_SIZES)?;
    let tol = opts.tol.unwrap_or(1e-6);
    let mut out = Outputs::new(APP_HEADER, APP_HISTORY_HEADER);
    for &n in &sizes {
        if n < 2 {
            return Err(usage("lorenz sizes must be at least 2"));
        }
        for &seed in &seeds(opts)? {
            let mut p = LorenzProblem::new(n);
            p.noise_level = opts.noise;
            p.seed = seed;
            let sys = lorenz_build(&p)?;
            let fit = lorenz_solve_ns(&sys.x, &sys.y, tol, opts.maxit.unwrap_or(n.max(80)))?;
            let params = format!("N={n};noise={};seed={seed}", opts.noise);
            let r = &fit.report;
            out.push_row(app_row("lorenz-ns", &params, r.iterations, r.wall_time, None, fit.relres));
            for &(k, v) in &r.residual_history {
                out.push_history(format!("lorenz-ns,{params},{k},{v:e}"));
            }
            if !r.converged {
                out.warn(format!("lorenz N={n} seed {seed} stopped at RelRes {:e}", fit.relres));
            }
        }
    }
    Ok(out)
}

pub fn deblur(opts: &Opts) -> Result<Outputs, CliError> {
    let image = opts.input.as_deref().map(read_ppm).transpose()?;
    let sizes = if image.is_some() { vec![0] } else { sizes(opts, DEFAULT_DEBLUR_SIZES)? };
    if opts.lambda.iter().any(|&l| l.is_nan() || l <= 0.0) {
        return Err(usage("--lambda values must be positive"));
    }
    let mut out = Outputs::new(APP_HEADER, "");
    for &n in &sizes {
        for &lambda in &opts.lambda {
            for &seed in &seeds(opts)? {
                let img = image.clone().unwrap_or_else(|| synthetic_image(n, n));
                let (h, w) = img.shape();
                let mut p = DeblurProblem::new(img);
                p.psf_radius = opts.psf_radius;
                p.psf_sigma = opts.psf_sigma;
                p.snr_db = opts.snr_db;
                p.lambda = lambda;
                p.seed = seed;
                if let Some(t) = opts.tol {
                    p.tol = t;
                }
                if let Some(k) = opts.maxit {
                    p.maxit = k;
                }
                let o = deblur_fft_ns(&p)?;
                let params = format!(
                    "{h}x{w};lambda={lambda};r={};sigma={};snr={};seed={seed}",
                    opts.psf_radius, opts.psf_sigma, opts.snr_db
                );
                let gap = o.restored.rel_diff(&o.closed_form)?;
                out.push_row(app_row("deblur-blurred", &params, 0, Duration::ZERO, Some(o.psnr_blurred), f64::NAN));
                out.push_row(app_row("deblur-fft-ns", &params, o.iterations, o.wall_time, Some(o.psnr_restored), o.residual));
                out.push_row(app_row("deblur-closed-form", &params, 0, Duration::ZERO, Some(o.psnr_closed_form), gap));
                if let Some(path) = &opts.out {
                    let tag = format!("-{h}x{w}-lambda{lambda}-seed{seed}");
                    write_triplet(path, &tag, &p.image, &o.blurred, &o.restored)?;
                }
            }
        }
    }
    Ok(out)
}

fn write_triplet(path: &Path, tag: &str, original: &QMat, blurred: &QMat, restored: &QMat) -> Result<()> {
    write_ppm(sibling(path, &format!("{tag}-original.ppm")), original)?;
    write_ppm(sibling(path, &format!("{tag}-blurred.ppm")), blurred)?;
    write_ppm(sibling(path, &format!("{tag}-restored.ppm")), restored)
}
