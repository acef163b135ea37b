use std::time::Instant;

use quatpinv::factor::{pinv_normal_eq, pinv_qsvd, DEFAULT_RANK_TOL, DEFAULT_RIDGE};
use quatpinv::solvers::{
    cgne_q, hybrid_rsp_ns, hyperpower_recurrence_trace, ns_damped, ns_hyperpower, ns_recurrence_trace, rsp_column,
    rsp_row, Schedule, SketchConfig, SolverConfig, SolverReport, CSV_HEADER,
};
use quatpinv::QMat;

use crate::args::Opts;
use crate::output::{Outputs, HISTORY_HEADER};
use crate::pool::run_grid;
use crate::{usage, CliError};

pub const PINV_METHODS: &[&str] = &["ns", "hyperpower", "cgne", "rsp", "hybrid", "qsvd-baseline", "normal-eq"];
pub const RSP_METHODS: &[&str] = &["rsp", "hybrid"];
const KNOWN_METHODS: &[&str] = &["ns", "hyperpower", "cgne", "cgne-pre", "rsp", "hybrid", "qsvd-baseline", "normal-eq"];
pub const DEFAULT_BENCH_SIZES: &[usize] = &[20, 50, 100, 150, 200];
pub const RECURRENCE_HEADER: &str = "recurrence,param,seed,iter,deviation";

/// `(n + 20) × n`, the benchmark layout.
pub fn bench_shape(n: usize) -> (usize, usize) {
    (n + 20, n)
}

fn methods(opts: &Opts, default: &[&str]) -> Result<Vec<String>, CliError> {
    let list: Vec<String> = match &opts.method {
        Some(m) => m.iter().map(|s| s.trim().to_ascii_lowercase()).collect(),
        None => default.iter().map(|s| s.to_string()).collect(),
    };
    if list.is_empty() {
        return Err(usage("--method needs at least one entry"));
    }
    if let Some(bad) = list.iter().find(|m| !KNOWN_METHODS.contains(&m.as_str())) {
        return Err(usage(format!("unknown method '{bad}' (expected one of {})", KNOWN_METHODS.join(", "))));
    }
    Ok(list)
}

pub(crate) fn sizes(opts: &Opts, default: &[usize]) -> Result<Vec<usize>, CliError> {
    let s = opts.sizes.clone().unwrap_or_else(|| default.to_vec());
    if s.is_empty() {
        return Err(usage("--sizes must list at least one size"));
    }
    if s.contains(&0) {
        return Err(usage("--sizes must be positive"));
    }
    Ok(s)
}

pub(crate) fn seeds(opts: &Opts) -> Result<Vec<u64>, CliError> {
    if opts.seeds.is_empty() {
        return Err(usage("--seeds must list at least one seed"));
    }
    Ok(opts.seeds.clone())
}

fn solver_config(opts: &Opts, method: &str) -> SolverConfig {
    let sketchy = matches!(method, "rsp" | "hybrid");
    let maxit = match method {
        "rsp" => 20_000,
        "hybrid" => 2_000,
        "cgne" | "cgne-pre" => 1_000,
        _ => 200,
    };
    SolverConfig {
        gamma: opts.gamma,
        order: if matches!(method, "ns") { 2 } else { opts.order },
        schedule: opts.schedule,
        tol: opts.tol.unwrap_or(if sketchy { 1e-3 } else { 1e-8 }),
        maxit: opts.maxit.unwrap_or(maxit),
        ..Default::default()
    }
}

fn sketch_config(opts: &Opts, seed: u64) -> SketchConfig {
    SketchConfig { block_r: opts.block_r, test_s: opts.test_s, cycle_t: opts.cycle_t, seed, ..Default::default() }
}

/// Runs one named method on `a`; the matrix seed doubles as the sketch seed.
pub fn run_method(method: &str, a: &QMat, opts: &Opts, seed: u64) -> quatpinv::Result<(QMat, SolverReport)> {
    let cfg = solver_config(opts, method);
    let sk = sketch_config(opts, seed);
    let (m, n) = a.shape();
    let tagged = |(x, mut r): (QMat, SolverReport)| {
        r.seed = Some(seed);
        (x, r)
    };
    match method {
        "ns" => ns_damped(a, &cfg).map(tagged),
        "hyperpower" => ns_hyperpower(a, &cfg).map(tagged),
        "cgne" => cgne_q(a, &cfg, None).map(tagged),
        "cgne-pre" => cgne_q(a, &cfg, Some(&sk)),
        "rsp" if m >= n => rsp_column(a, &cfg, &sk),
        "rsp" => rsp_row(a, &cfg, &sk),
        "hybrid" => hybrid_rsp_ns(a, &cfg, &sk),
        "qsvd-baseline" | "normal-eq" => {
            let start = Instant::now();
            let x = if method == "qsvd-baseline" { pinv_qsvd(a, DEFAULT_RANK_TOL)? } else { pinv_normal_eq(a, DEFAULT_RIDGE)? };
            let elapsed = start.elapsed();
            let r = SolverReport::direct(method, a, &x, Some(seed), elapsed)?;
            Ok((x, r))
        }
        other => Err(quatpinv::Error::InvalidConfig(format!("unknown method '{other}'"))),
    }
}

fn failed_row(method: &str, (m, n): (usize, usize), seed: u64) -> String {
    format!("{method},{m},{n},{seed},0,0.000000,NaN,NaN,NaN,NaN,NaN")
}

/// Shared driver for `pinv-bench` and `rsp-bench`.
pub fn solver_bench(opts: &Opts, default_methods: &[&str]) -> Result<Outputs, CliError> {
    let sizes = sizes(opts, DEFAULT_BENCH_SIZES)?;
    let seeds = seeds(opts)?;
    let methods = methods(opts, default_methods)?;
    let mut jobs = Vec::new();
    for &n in &sizes {
        for &seed in &seeds {
            for method in &methods {
                jobs.push((n, seed, method.clone()));
            }
        }
    }
    let results = run_grid(&jobs, |(n, seed, method)| {
        let (rows, cols) = bench_shape(*n);
        let a = QMat::randn(rows, cols, *seed);
        (run_method(method, &a, opts, *seed).map(|(_, r)| r), (rows, cols))
    });

    let mut out = Outputs::new(CSV_HEADER, HISTORY_HEADER);
    for ((_, seed, method), (res, shape)) in jobs.iter().zip(results) {
        match res {
            Ok(r) => {
                out.push_row(r.csv_row());
                for &(k, v) in &r.residual_history {
                    out.push_history(format!("{},{},{},{},{},{:e}", r.method, shape.0, shape.1, seed, k, v));
                }
            }
            Err(e) => {
                out.warn(format!("{method} at {}x{} seed {seed} failed: {e}", shape.0, shape.1));
                out.push_row(failed_row(method, shape, *seed));
            }
        }
    }
    Ok(out)
}

/// Per-iteration deviation from the closed residual recurrences on random
/// 10×6 matrices.
pub fn recurrence_check(opts: &Opts) -> Result<Outputs, CliError> {
    let seeds = seeds(opts)?;
    let iters = opts.maxit.unwrap_or(10);
    let mut out = Outputs::new(RECURRENCE_HEADER, "");
    for &seed in &seeds {
        let a = QMat::randn(10, 6, seed);
        for gamma in [0.5, 1.0] {
            let dev = ns_recurrence_trace(&a, gamma, iters)?;
            for (k, d) in dev.iter().enumerate() {
                out.push_row(format!("ns,gamma={gamma},{seed},{},{d:e}", k + 1));
            }
        }
        for p in [2usize, 3, 4, 8] {
            if opts.schedule == Schedule::BinaryPow2 && !p.is_power_of_two() {
                out.warn(format!("p={p} skipped: binary-pow2 needs a power-of-two order"));
                continue;
            }
            let dev = hyperpower_recurrence_trace(&a, p, opts.schedule, iters)?;
            for (k, d) in dev.iter().enumerate() {
                out.push_row(format!("hyperpower,p={p},{seed},{},{d:e}", k + 1));
            }
        }
    }
    Ok(out)
}
