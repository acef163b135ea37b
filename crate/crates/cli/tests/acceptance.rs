//! Acceptance criteria 1 to 10. Prints one PASS/FAIL line per criterion.
//!
//! A failing criterion is reported, not fatal, so that the workspace test run
//! stays usable; set `ACCEPTANCE_STRICT=1` to turn any FAIL into a nonzero exit.

use std::time::Instant;

use clap::Parser;
use quatpinv::apps::{
    complete, cur_reconstruct, deblur_fft_ns, lorenz_build, lorenz_solve_ns, synthetic_image, CompletionProblem,
    CurMode, DeblurProblem, LorenzProblem,
};
use quatpinv::factor::{pinv_normal_eq, pinv_qsvd, thin_qr, DEFAULT_RANK_TOL, DEFAULT_RIDGE};
use quatpinv::rng::GaussianStream;
use quatpinv::solvers::{
    cgne_q, eval_neumann_poly_counted, hybrid_rsp_ns, hyperpower_recurrence_trace, ns_damped, ns_hyperpower,
    ns_recurrence_trace, rsp_column, rsp_rate_check, rsp_row, Alpha, PolySide, RspColumn, RspRow, Schedule,
    SketchConfig, SolverConfig, SolverReport,
};
use quatpinv::{Mask, QMat, Result};
use quatpinv_cli::args::Cli;
use quatpinv_cli::output::strip_column;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn penrose_residuals() -> Result<Outcome> {
    let start = Instant::now();
    let cfg = SolverConfig { alpha: Alpha::Auto, gamma: 1.0, tol: 0.0, maxit: 35, ..Default::default() };
    let mut worst = 0.0f64;
    let mut runs = 0;
    for n in [20, 50, 100] {
        for seed in 0..10 {
            let a = QMat::randn(n, n + 50, seed);
            let (_, r) = ns_damped(&a, &cfg)?;
            worst = worst.max(r.penrose.max());
            runs += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(worst <= 1e-8 && secs < 60.0, format!("{runs} runs, max e = {worst:.2e}, {secs:.1} s")))
}

fn recurrences() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let a = QMat::randn(10, 6, seed);
        for gamma in [0.5, 1.0] {
            worst = ns_recurrence_trace(&a, gamma, 12)?.into_iter().fold(worst, f64::max);
        }
        for p in [2, 3, 4, 8] {
            for schedule in [Schedule::Naive, Schedule::PatersonStockmeyer] {
                worst = hyperpower_recurrence_trace(&a, p, schedule, 12)?.into_iter().fold(worst, f64::max);
            }
        }
    }
    Ok(outcome(worst <= 1e-11, format!("max deviation {worst:.2e}")))
}

fn schedules() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let a = QMat::randn(12, 7, seed);
        let x = a.adjoint().scale(1.0 / a.fro_norm_sqr());
        let f = x.matmul(&a)?.identity_minus()?;
        for p in 2..=16 {
            let (naive, _) = eval_neumann_poly_counted(&f, &x, p, Schedule::Naive, PolySide::Right)?;
            let (ps, _) = eval_neumann_poly_counted(&f, &x, p, Schedule::PatersonStockmeyer, PolySide::Right)?;
            worst = worst.max(ps.rel_diff(&naive)?);
            if p.is_power_of_two() {
                let (bin, _) = eval_neumann_poly_counted(&f, &x, p, Schedule::BinaryPow2, PolySide::Right)?;
                worst = worst.max(bin.rel_diff(&naive)?);
            }
        }
    }
    let a = QMat::randn(9, 5, 1);
    let x = a.adjoint().scale(1.0 / a.fro_norm_sqr());
    let f = x.matmul(&a)?.identity_minus()?;
    let (_, c8) = eval_neumann_poly_counted(&f, &x, 8, Schedule::BinaryPow2, PolySide::Right)?;
    let (_, c16) = eval_neumann_poly_counted(&f, &x, 16, Schedule::BinaryPow2, PolySide::Right)?;
    Ok(outcome(
        worst <= 1e-11 && c8 == 2 && c16 == 3,
        format!("max relative gap {worst:.2e}, squarings p=8: {c8}, p=16: {c16}"),
    ))
}

type Check = fn() -> Result<Outcome>;

type Solver = fn(&QMat, u64) -> Result<(QMat, SolverReport)>;

fn tight() -> SolverConfig {
    SolverConfig { tol: 1e-10, maxit: 500, ..Default::default() }
}

fn sketch(seed: u64) -> SketchConfig {
    SketchConfig { block_r: 4, test_s: 4, seed, ..Default::default() }
}

fn oracles() -> Result<Outcome> {
    let column: &[(&str, Solver)] = &[
        ("ns", |a, _| ns_damped(a, &tight())),
        ("hyperpower-4", |a, _| ns_hyperpower(a, &SolverConfig { order: 4, schedule: Schedule::PatersonStockmeyer, ..tight() })),
        ("cgne", |a, _| cgne_q(a, &tight(), None)),
        ("cgne-pre", |a, s| cgne_q(a, &tight(), Some(&sketch(s)))),
        ("rsp", |a, s| rsp_column(a, &SolverConfig { tol: 1e-12, maxit: 20_000, ..tight() }, &sketch(s))),
        ("hybrid", |a, s| hybrid_rsp_ns(a, &SolverConfig { order: 4, tol: 1e-12, ..tight() }, &sketch(s))),
    ];
    let row: &[(&str, Solver)] = &[
        ("ns", |a, _| ns_damped(a, &tight())),
        ("hyperpower-4", |a, _| ns_hyperpower(a, &SolverConfig { order: 4, schedule: Schedule::PatersonStockmeyer, ..tight() })),
        ("cgne", |a, _| cgne_q(a, &tight(), None)),
        ("cgne-pre", |a, s| cgne_q(a, &tight(), Some(&sketch(s)))),
        ("rsp", |a, s| rsp_row(a, &SolverConfig { tol: 1e-12, maxit: 20_000, ..tight() }, &sketch(s))),
    ];
    let mut worst = 0.0f64;
    let mut worst_name = "";
    let mut checked = 0;
    for (shape, solvers) in [((16, 8), column), ((8, 16), row)] {
        for seed in 0..20 {
            let a = QMat::randn(shape.0, shape.1, 1000 + seed);
            let ne = pinv_normal_eq(&a, DEFAULT_RIDGE)?;
            let sv = pinv_qsvd(&a, DEFAULT_RANK_TOL)?;
            for (name, solve) in solvers {
                let (x, _) = solve(&a, seed)?;
                let gap = x.rel_diff(&ne)?.max(x.rel_diff(&sv)?);
                if gap > worst {
                    worst = gap;
                    worst_name = name;
                }
                checked += 1;
            }
        }
    }
    Ok(outcome(
        worst <= 1e-6,
        format!("{checked} solves, worst relative gap {worst:.2e} ({worst_name}); hybrid is column-only"),
    ))
}

fn rsp_monotone_and_rate() -> Result<Outcome> {
    let mut violations = 0;
    let mut steps = 0;
    let mut rates = Vec::new();
    let mut rate_ok = true;
    for r in [1, 4, 8] {
        let sk = SketchConfig { block_r: r, seed: 7, ..Default::default() };
        for seed in 0..3 {
            let a = QMat::randn(30, 10, 50 + seed);
            let pinv = pinv_qsvd(&a, DEFAULT_RANK_TOL)?;
            let x0 = a.adjoint().scale(1.0 / a.fro_norm_sqr());
            let mut col = RspColumn::new(&a, x0.clone(), &sk, GaussianStream::new(seed));
            let mut prev = col.x().sub(&pinv)?.fro_norm();
            let floor = 1e-13 * pinv.fro_norm();
            for _ in 0..150 {
                col.step()?;
                let d = col.x().sub(&pinv)?.fro_norm();
                violations += (d > prev * (1.0 + 1e-12) + floor) as usize;
                prev = d;
                steps += 1;
            }
            let b = a.adjoint();
            let bpinv = pinv.adjoint();
            let mut row = RspRow::new(&b, x0.adjoint(), &sk, GaussianStream::new(seed));
            let mut prev = row.x().sub(&bpinv)?.fro_norm();
            for _ in 0..150 {
                row.step()?;
                let d = row.x().sub(&bpinv)?.fro_norm();
                violations += (d > prev * (1.0 + 1e-12) + floor) as usize;
                prev = d;
                steps += 1;
            }
        }
        let a = QMat::randn(30, 10, 99);
        let check = rsp_rate_check(&a, &sk, 100)?;
        rate_ok &= check.holds();
        rates.push(format!("r={r}: {:.4} vs {:.4}", check.mean, check.bound + 3.0 * check.std_err));
    }
    Ok(outcome(
        violations == 0 && rate_ok,
        format!("{violations} increases in {steps} steps; contraction {}", rates.join(", ")),
    ))
}

fn cgne_cases() -> Result<Outcome> {
    let q = thin_qr(&QMat::randn(12, 5, 3))?.q;
    let (x, rep) = cgne_q(&q, &SolverConfig::default(), None)?;
    let gap = x.sub(&q.adjoint())?.fro_norm();
    let one_step = rep.iterations == 1 && gap <= 1e-12;
    let mut increases = 0;
    let mut iters = 0;
    for seed in 0..10 {
        for shape in [(20, 12), (12, 20)] {
            let a = QMat::randn(shape.0, shape.1, 200 + seed);
            let (_, r) = cgne_q(&a, &SolverConfig::default(), None)?;
            for w in r.residual_history.windows(2) {
                increases += (w[1].1 >= w[0].1) as usize;
                iters += 1;
            }
        }
    }
    Ok(outcome(
        one_step && increases == 0,
        format!("orthonormal case: {} iteration, gap {gap:.1e}; {increases} non-decreases in {iters} steps", rep.iterations),
    ))
}

fn lorenz() -> Result<Outcome> {
    let start = Instant::now();
    let sys = lorenz_build(&LorenzProblem::new(50))?;
    let fit = lorenz_solve_ns(&sys.x, &sys.y, 1e-6, 80)?;
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        fit.relres <= 1e-6 && fit.report.iterations <= 80 && secs < 5.0,
        format!("N=50: {} iterations, RelRes {:.2e}, {secs:.2} s", fit.report.iterations, fit.relres),
    ))
}

fn deblur() -> Result<Outcome> {
    let mut gap = 0.0f64;
    let mut db = 0.0f64;
    for n in [32, 64, 128] {
        for lambda in [0.02, 0.05] {
            let mut p = DeblurProblem::new(synthetic_image(n, n));
            p.lambda = lambda;
            let o = deblur_fft_ns(&p)?;
            gap = gap.max(o.restored.rel_diff(&o.closed_form)?);
            db = db.max((o.psnr_restored - o.psnr_closed_form).abs());
        }
    }
    Ok(outcome(gap <= 1e-10 && db <= 0.01, format!("max relative gap {gap:.2e}, max PSNR gap {db:.2e} dB")))
}

fn cur() -> Result<Outcome> {
    let pinv = |a: &QMat| pinv_normal_eq(a, DEFAULT_RIDGE);
    let mut exact = 0.0f64;
    let mut sampled = 0;
    for seed in 0..5 {
        let a = QMat::randn(60, 5, seed).matmul(&QMat::randn(5, 60, seed + 100))?;
        let prob = CompletionProblem::new(a.clone(), Mask::full(60, 60), 5, 1, seed)?;
        let c = a.select_cols(&prob.col_idx)?;
        let r = a.select_rows(&prob.row_idx)?;
        if thin_qr(&c).is_err() || thin_qr(&r.adjoint()).is_err() {
            continue;
        }
        sampled += 1;
        let x = cur_reconstruct(&a, &prob.row_idx, &prob.col_idx, CurMode::UOpt, &pinv)?;
        exact = exact.max(x.sub(&a)?.fro_norm() / a.fro_norm());
    }
    let mut monotone = 0;
    let mut worst_rise = 0.0f64;
    let seeds = 5;
    for seed in 0..seeds {
        let a = QMat::randn(60, 5, 300 + seed).matmul(&QMat::randn(5, 60, 400 + seed))?;
        let prob = CompletionProblem::new(a, Mask::random(60, 60, 0.7, seed), 5, 25, seed)?;
        let (_, h) = complete(&prob, &pinv)?;
        let rise = h[15..].iter().zip(&h[14..]).map(|(b, a)| (b - a) / a).fold(0.0f64, f64::max);
        worst_rise = worst_rise.max(rise);
        monotone += (rise <= 0.0) as usize;
    }
    Ok(outcome(
        sampled > 0 && exact <= 1e-8 && monotone == seeds as usize,
        format!(
            "exact CUR error {exact:.2e} over {sampled} full-rank draws; tail nonincreasing in {monotone}/{seeds} completions (largest relative rise {worst_rise:.1e})"
        ),
    ))
}

fn determinism() -> Result<Outcome> {
    let commands: &[&[&str]] = &[
        &["pinv-bench", "--sizes", "20", "--seeds", "1,2"],
        &["rsp-bench", "--sizes", "20", "--seeds", "3"],
        &["recurrence-check", "--seeds", "4"],
        &["cur-complete", "--sizes", "30", "--maxit", "5"],
        &["lorenz", "--sizes", "20,30"],
        &["deblur", "--sizes", "32"],
    ];
    let run = |args: &[&str]| -> String {
        let cli = Cli::try_parse_from(std::iter::once("quatpinv").chain(args.iter().copied())).expect("valid flags");
        let out = quatpinv_cli::execute(&cli.command).expect("command runs");
        strip_column(&out.csv(), "wall_s")
    };
    let mut differing = Vec::new();
    for args in commands {
        let first = run(args);
        std::env::set_var(quatpinv_cli::pool::THREADS_ENV, "4");
        let threaded = run(args);
        std::env::remove_var(quatpinv_cli::pool::THREADS_ENV);
        let again = run(args);
        if first != again || first != threaded {
            differing.push(args[0]);
        }
    }
    Ok(outcome(
        differing.is_empty(),
        format!("{} commands rerun sequentially and with 4 workers; differing: {:?}", commands.len(), differing),
    ))
}

fn main() {
    let criteria: [(&str, Check); 10] = [
        ("Penrose residuals of NS at 35 iterations", penrose_residuals),
        ("exact residual recurrences", recurrences),
        ("schedule equivalence and squaring counts", schedules),
        ("oracle equivalence on tall and wide inputs", oracles),
        ("RSP monotonicity and rate", rsp_monotone_and_rate),
        ("CGNE one-step case and strict decrease", cgne_cases),
        ("Lorenz N=50 envelope", lorenz),
        ("deblurring parity", deblur),
        ("CUR exactness and completion tail", cur),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        failed += (!o.pass) as usize;
        println!(
            "{} {:>2} {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
