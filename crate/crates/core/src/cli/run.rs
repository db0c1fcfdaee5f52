//! Dispatch a `RunConfig` to its experiment and persist the outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::bernstein::{g_bounds, scaling_certificate, section6_build_f, stieltjes_g, PhiModel, PiecewiseSchedule};
use crate::cli::config::{ExperimentKind, RunConfig};
use crate::error::{Error, Result};
use crate::ladder::{interval_exit_bound_check, kappa_profile, ladder_for, renewal_comparability_check};
use crate::levy::{asymp_ratio_profile, AsympKind};
use crate::potential::{
    bhp_experiment, exit_time_profile_check, factorization_experiment, harnack_experiment, kernel_estimate,
    poisson_kernel_check, KernelBins,
};
use crate::profile::{log_grid, RatioProfile};
use crate::quad::QuadSpec;
use crate::report::{num, ExperimentReport, Status};
use crate::sim::{expected_exit_time, ExitBatch, ExitSampler, Geometry};
use crate::special::stable_ball_exit_time;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Pass,
    Fail,
    Inconclusive,
    Error,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Pass => 0,
            RunStatus::Fail => 1,
            RunStatus::Inconclusive => 2,
            RunStatus::Error => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Pass => "pass",
            RunStatus::Fail => "fail",
            RunStatus::Inconclusive => "inconclusive",
            RunStatus::Error => "error",
        }
    }
}

impl From<Status> for RunStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Pass => RunStatus::Pass,
            Status::Fail => RunStatus::Fail,
            Status::Inconclusive => RunStatus::Inconclusive,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub report: Option<ExperimentReport>,
    pub error: Option<String>,
    pub files: Vec<PathBuf>,
}

fn profile_report(name: &str, seed: u64, p: &RatioProfile, max_spread: f64) -> ExperimentReport {
    let mut rep = ExperimentReport::new(name, seed, &["arg", "aux", "ratio"]);
    rep.param("profile", &p.label);
    for q in &p.points {
        rep.row(vec![num(q.arg), q.aux.map(num).unwrap_or_default(), num(q.ratio)]);
    }
    rep.constant("min", p.min);
    rep.constant("max", p.max);
    rep.constant("spread", p.spread());
    rep.check(
        "bounded",
        Status::from_bool(p.min > 0.0 && p.spread() <= max_spread),
        format!("spread {} (cap {max_spread})", p.spread()),
    );
    rep
}

fn with_n<T: Clone>(cfg: &T, n: Option<usize>, set: impl Fn(&mut T, usize)) -> T {
    let mut c = cfg.clone();
    if let Some(n) = n {
        set(&mut c, n);
    }
    c
}

/// Execute the experiment without touching the filesystem.
pub fn execute(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let seed = cfg.seed;
    let name = cfg.experiment.name();
    let model = cfg.model.process()?;
    let checks = &cfg.checks;
    let mut rep = match cfg.experiment {
        ExperimentKind::PhiEval => {
            let phi = model.phi();
            let mut rep = ExperimentReport::new(name, seed, &["lambda", "phi", "phi_over_lambda"]);
            let grid = cfg.grid.values()?;
            let vals = grid.iter().map(|&l| phi.eval(l)).collect::<Result<Vec<_>>>()?;
            for (l, v) in grid.iter().zip(&vals) {
                rep.row(vec![num(*l), num(*v), num(v / l)]);
            }
            let mono = vals.windows(2).all(|w| w[1] >= w[0]);
            let concave = grid.windows(2).zip(vals.windows(2)).all(|(l, v)| v[1] / l[1] <= v[0] / l[0] * (1.0 + 1e-12));
            rep.check("positive", Status::from_bool(vals.iter().all(|v| *v > 0.0)), "");
            rep.check("increasing", Status::from_bool(mono), "");
            rep.check("phi_over_lambda_decreasing", Status::from_bool(concave), "");
            rep
        }
        ExperimentKind::PhiCert => {
            let c = scaling_certificate(model.phi(), checks.r0, &checks.cert)?;
            let mut rep = ExperimentReport::new(name, seed, &["quantity", "value", "lambda", "r"]);
            for (q, v, w) in [
                ("delta1", c.delta1, c.witness_delta1),
                ("delta2", c.delta2, c.witness_delta2),
                ("a1", c.a1, c.witness_a1),
                ("a2", c.a2, c.witness_a2),
            ] {
                rep.row(vec![q.into(), num(v), num(w.0), num(w.1)]);
                rep.constant(q, v);
            }
            rep.param("r0", c.r0);
            rep.check("certificate", Status::from_bool(c.pass), "0 < delta1 <= delta2 < 1 on the grid");
            rep
        }
        ExperimentKind::PhiSection6 => section6_report(cfg)?,
        ExperimentKind::LevyJ => {
            let mut rep = ExperimentReport::new(name, seed, &["r", "j", "jump_kernel"]);
            let grid = cfg.grid.values()?;
            let mut prev = f64::INFINITY;
            let mut ok = true;
            for &r in &grid {
                let j = model.j_density(r)?;
                let jx = model.jump_kernel(r)?;
                ok &= j > 0.0 && j <= prev;
                prev = j;
                rep.row(vec![num(r), num(j), num(jx)]);
            }
            rep.check("positive_decreasing", Status::from_bool(ok), "");
            rep
        }
        ExperimentKind::LevyMu => {
            let sub = &model.sub;
            let mut rep = ExperimentReport::new(name, seed, &["t", "mu", "tail"]);
            let mut ok = true;
            for &t in &cfg.grid.values()? {
                let (m, tl) = (sub.mu_density(t)?, sub.mu_tail(t)?);
                ok &= m > 0.0 && tl > 0.0;
                rep.row(vec![num(t), num(m), num(tl)]);
            }
            rep.check("positive", Status::from_bool(ok), "");
            rep
        }
        ExperimentKind::LevyAsymp => {
            let kind: AsympKind = checks.asymp.parse()?;
            let p = asymp_ratio_profile(&model, kind, &cfg.grid.values()?)?;
            profile_report(name, seed, &p, checks.max_spread)
        }
        ExperimentKind::LadderKappa => {
            let p = kappa_profile(&ladder_for(&model), &cfg.grid.values()?)?;
            profile_report(name, seed, &p, checks.max_spread)
        }
        ExperimentKind::LadderRenewal => {
            let p = renewal_comparability_check(&model, &cfg.grid.values()?)?;
            profile_report(name, seed, &p, checks.max_spread)
        }
        ExperimentKind::LadderInterval => {
            interval_exit_bound_check(&model, 1.0, &checks.interval_points, cfg.n.unwrap_or(20_000), seed, cfg.sampler.params())?
        }
        ExperimentKind::SimExit | ExperimentKind::SimExitTime | ExperimentKind::Kernel => {
            single_point(cfg, &ExitSampler::new(&model, cfg.sampler.strategy, cfg.sampler.params())?)?
        }
        kind => {
            let s = ExitSampler::new(&model, cfg.sampler.strategy, cfg.sampler.params())?;
            let n = cfg.n;
            match kind {
                ExperimentKind::PoissonKernel => {
                    poisson_kernel_check(&s, &with_n(&cfg.poisson_kernel, n, |c, n| c.n = n), seed)?
                }
                ExperimentKind::ExitTime => exit_time_profile_check(&s, &with_n(&cfg.exit_time, n, |c, n| c.n = n), seed)?,
                ExperimentKind::Harnack => harnack_experiment(&s, &with_n(&cfg.harnack, n, |c, n| c.n = n), seed)?,
                ExperimentKind::Factorization => {
                    factorization_experiment(&s, &with_n(&cfg.factorization, n, |c, n| c.n = n), seed)?
                }
                ExperimentKind::Bhp => bhp_experiment(&s, &with_n(&cfg.bhp, n, |c, n| c.n = n), seed)?,
                _ => unreachable!("analytic experiments handled above"),
            }
        }
    };
    rep.name = name.to_string();
    Ok(rep)
}

fn section6_report(cfg: &RunConfig) -> Result<ExperimentReport> {
    let m = &cfg.model;
    let spec = QuadSpec::with_rel_tol(1e-9);
    let schedule = section6_build_f(m.pieces, m.epsilon, m.continuity)?;
    let mut rep = ExperimentReport::new("phi_section6", cfg.seed, &["piece", "lo", "hi", "beta", "scale", "offset"]);
    rep.param("pieces", m.pieces).param("epsilon", m.epsilon).param("continuity", format!("{:?}", m.continuity));
    for (k, p) in schedule.pieces.iter().enumerate() {
        rep.row(vec![k.to_string(), num(p.lo), num(p.hi), num(p.beta), num(p.scale), num(p.offset)]);
    }
    let degenerate = PiecewiseSchedule::degenerate();
    let mut worst: f64 = 0.0;
    for l in log_grid(1e-2, 1e4, 4) {
        let g = stieltjes_g(&degenerate, l, &spec)?;
        worst = worst.max((g * 2.0 * l.sqrt() / std::f64::consts::PI - 1.0).abs());
    }
    rep.constant("degenerate_rel_error", worst);
    rep.check("degenerate_closed_form", Status::from_bool(worst <= 1e-5), format!("max rel error {worst:e}"));
    let (c1, c2) = g_bounds(&schedule, &log_grid(2.0, 1e6, 10), &spec)?;
    rep.constant("c1", c1);
    rep.constant("c2", c2);
    rep.check(
        "g_bounds",
        Status::from_bool(c1 > 0.0 && c1.is_finite() && c2.is_finite() && c2 > 0.0),
        "c1 l^{-2/3} <= g <= c2 l^{-1/2} on [2, 1e6]",
    );
    let grid = &cfg.checks.cert;
    let (lo, hi) = (0.1 / (cfg.checks.r0 * cfg.checks.r0), 10.0 * grid.lambda_max * grid.r_max);
    let phi = PhiModel::section_six(schedule).tabulate(lo, hi, 40)?;
    let c = scaling_certificate(&phi, cfg.checks.r0, grid)?;
    rep.constant("delta1", c.delta1);
    rep.constant("delta2", c.delta2);
    rep.check(
        "indices",
        Status::from_bool((c.delta1 - 1.0 / 3.0).abs() <= 0.05 && (c.delta2 - 0.5).abs() <= 0.05),
        format!("delta1 {} delta2 {}", c.delta1, c.delta2),
    );
    Ok(rep)
}

fn single_point(cfg: &RunConfig, s: &ExitSampler) -> Result<ExperimentReport> {
    let g = cfg.geometry_or_ball();
    let x = cfg.start_point();
    let d = cfg.model.d;
    let seed = cfg.seed;
    match cfg.experiment {
        ExperimentKind::SimExit => {
            let n = cfg.n.unwrap_or(10_000);
            let b = ExitBatch::generate(s, &g, &x, n, seed)?;
            let mut cols = vec!["index".to_string(), "time".into(), "by_jump".into(), "steps".into()];
            cols.extend((0..d).map(|i| format!("x{i}")));
            let cols: Vec<&str> = cols.iter().map(|c| c.as_str()).collect();
            let mut rep = ExperimentReport::new("sim_exit", seed, &cols);
            rep.param("geometry", g.name()).param("start", format!("{x:?}")).param("n", n);
            let mut inside = 0usize;
            for (i, smp) in &b.samples {
                inside += g.contains(&smp.position) as usize;
                let mut row = vec![i.to_string(), num(smp.time), smp.exited_by_jump.to_string(), smp.steps.to_string()];
                row.extend(smp.position.iter().map(|v| num(*v)));
                rep.row(row);
            }
            rep.constant("censored_fraction", b.censored_fraction());
            rep.constant("jump_fraction", b.jump_fraction());
            rep.check("outside", Status::from_bool(inside == 0), format!("{inside} exits inside the domain"));
            if b.censored_fraction() > 0.01 {
                rep.check("censoring", Status::Inconclusive, "more than 1% of paths censored");
            }
            Ok(rep)
        }
        ExperimentKind::SimExitTime => {
            let n = cfg.n.unwrap_or(100_000);
            let e = expected_exit_time(s, &g, &x, n, seed)?;
            let mut rep = ExperimentReport::new("sim_exit_time", seed, &["mean", "stderr", "censored_fraction", "closed_form"]);
            rep.param("geometry", g.name()).param("start", format!("{x:?}")).param("n", n);
            let exact = match (&g, s.model.phi().stable_alpha(), s.model.modulation) {
                (Geometry::Ball { center, radius }, Some(a), crate::levy::Modulation::Unit) => {
                    let dist = x.iter().zip(center).map(|(p, c)| (p - c) * (p - c)).sum::<f64>().sqrt();
                    Some(stable_ball_exit_time(d, a, *radius, dist))
                }
                _ => None,
            };
            rep.row(vec![num(e.mean), num(e.stderr), num(e.censored_fraction), exact.map(num).unwrap_or_default()]);
            rep.constant("mean", e.mean);
            rep.constant("stderr", e.stderr);
            if let Some(v) = exact {
                rep.constant("closed_form", v);
                rep.check("closed_form", Status::from_bool((e.mean - v).abs() <= 3.0 * e.stderr + 1e-9 * v), format!("{} vs {v}", e.mean));
            }
            if e.unreliable() {
                rep.check("censoring", Status::Inconclusive, "more than 1% of paths censored");
            }
            Ok(rep)
        }
        _ => {
            let bins = KernelBins::for_geometry(&g, d, cfg.checks.n_radial, cfg.checks.n_angular)?;
            let k = kernel_estimate(s, &g, &x, &bins, cfg.n.unwrap_or(100_000), seed)?;
            Ok(k.to_report(seed))
        }
    }
}

fn write_file(path: &Path, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Run and persist `<name>.csv`, `<name>.summary` and `<name>.toml` under `out_dir`
/// (or `<name>.error` on failure). Errors map to `RunStatus::Error`, never to a panic.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> RunOutcome {
    let name = cfg.experiment.name();
    let mut files = Vec::new();
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let header = format!("harnack {name} seed={} unix_time={stamp}", cfg.seed);
    let result = fs::create_dir_all(out_dir)
        .map_err(|e| Error::io(out_dir, e))
        .and_then(|_| {
            let p = out_dir.join(format!("{name}.toml"));
            fs::write(&p, cfg.emit()?).map_err(|e| Error::io(&p, e))?;
            files.push(p);
            execute(cfg)
        });
    match result {
        Ok(rep) => {
            let csv = out_dir.join(format!("{name}.csv"));
            let summary = out_dir.join(format!("{name}.summary"));
            let written = write_file(&csv, |b| rep.write_csv(b)).and_then(|_| {
                write_file(&summary, |b| {
                    rep.write_summary(&mut *b, Some(&header))?;
                    b.extend_from_slice(format!("config.defaulted={}\n", cfg.defaulted.join(",")).as_bytes());
                    Ok(())
                })
            });
            match written {
                Ok(()) => {
                    files.push(csv);
                    files.push(summary);
                    RunOutcome {
                        status: rep.status().into(),
                        report: Some(rep),
                        error: None,
                        files,
                    }
                }
                Err(e) => RunOutcome {
                    status: RunStatus::Error,
                    report: Some(rep),
                    error: Some(e.to_string()),
                    files,
                },
            }
        }
        Err(e) => {
            let msg = e.to_string();
            let diag = out_dir.join(format!("{name}.error"));
            let text = format!("# {header}\nexperiment={name}\nstatus=error\nerror={}\n", msg.replace('\n', " "));
            if fs::write(&diag, text).is_ok() {
                files.push(diag);
            }
            RunOutcome {
                status: RunStatus::Error,
                report: None,
                error: Some(msg),
                files,
            }
        }
    }
}

/// Relative differences of the constants two reports share; `pass` iff all are within `tol`.
pub fn seed_stability(a: &ExperimentReport, b: &ExperimentReport, keys: &[String], tol: f64) -> ExperimentReport {
    let mut rep = ExperimentReport::new(
        format!("{}_seed_stability", a.name),
        a.seed,
        &["constant", "seed_a", "seed_b", "value_a", "value_b", "rel_diff"],
    );
    rep.param("tolerance", tol).param("seed_b", b.seed);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for (k, va) in &a.constants {
        if !keys.is_empty() && !keys.iter().any(|p| k.starts_with(p.as_str())) {
            continue;
        }
        let Some(vb) = b.get_constant(k) else { continue };
        let rel = (va - vb).abs() / va.abs().max(vb.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        compared += 1;
        rep.row(vec![k.clone(), a.seed.to_string(), b.seed.to_string(), num(*va), num(vb), num(rel)]);
    }
    rep.constant("max_rel_diff", worst);
    rep.constant("compared", compared as f64);
    if compared == 0 {
        rep.check("seed_stability", Status::Inconclusive, "no shared constants");
    } else {
        rep.check("seed_stability", Status::from_bool(worst <= tol), format!("max relative difference {worst}"));
    }
    rep
}
