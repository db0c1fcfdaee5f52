//! Acceptance battery: one line per criterion, then a single assertion over all of them.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use statrs::distribution::{Beta, ContinuousCDF};

use harnack_core::bernstein::{
    g_bounds, scaling_certificate, section6_build_f, stieltjes_g, CertGrid, Continuity, PhiModel, PiecewiseSchedule,
};
use harnack_core::cli::{run, seed_stability, stability_keys, ExperimentKind, RunConfig, RunStatus};
use harnack_core::ladder::{renewal_v, InversionMethod, LadderExponent};
use harnack_core::levy::{asymp_ratio_profile, AsympKind, ProcessModel};
use harnack_core::potential::{
    bhp_experiment, exit_time_profile_check, factorization_experiment, harnack_experiment, poisson_kernel_check,
    BhpConfig, ExitTimeConfig, ExperimentReport, FactorizationConfig, HarnackConfig, PoissonKernelConfig,
};
use harnack_core::profile::log_grid;
use harnack_core::quad::QuadSpec;
use harnack_core::sim::stats::chi_square;
use harnack_core::sim::{expected_exit_time, ExitBatch, ExitSampler, Geometry, SamplerParams, Strategy};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn cauchy_wos(d: usize) -> ExitSampler {
    ExitSampler::new(&ProcessModel::new(d, PhiModel::stable(1.0)), Strategy::WosStable, SamplerParams::default()).unwrap()
}

fn failing_checks(rep: &ExperimentReport) -> String {
    let bad: Vec<String> = rep
        .checks
        .iter()
        .filter(|c| c.status != harnack_core::report::Status::Pass)
        .map(|c| format!("{}={} ({})", c.name, c.status.name(), c.detail))
        .collect();
    if bad.is_empty() {
        "all checks pass".into()
    } else {
        bad.join("; ")
    }
}

fn constant(rep: &ExperimentReport, key: &str) -> f64 {
    rep.get_constant(key).unwrap_or(f64::NAN)
}

fn c1_subordination() -> Outcome {
    let m = ProcessModel::new(1, PhiModel::stable(1.0));
    let mut worst: f64 = 0.0;
    for r in log_grid(1e-3, 1e2, 20) {
        worst = worst.max(rel(m.j_density(r).unwrap(), 1.0 / (PI * r * r)));
    }
    outcome(worst <= 1e-4, format!("max rel error {worst:.2e} on [1e-3, 1e2]"))
}

fn c2_ladder() -> Outcome {
    let mut worst: f64 = 0.0;
    for ap in [0.3, 0.5, 0.7] {
        let l = LadderExponent::from_phi(PhiModel::stable(2.0 * ap));
        for lam in log_grid(1e-2, 1e4, 10) {
            worst = worst.max(rel(l.kappa(lam).unwrap(), lam.powf(ap)));
        }
    }
    outcome(worst <= 1e-4, format!("max rel error {worst:.2e}"))
}

fn c3_renewal() -> Outcome {
    let l = LadderExponent::from_phi(PhiModel::stable(1.0));
    let mut worst: f64 = 0.0;
    for r in log_grid(1e-2, 1e2, 10) {
        let v = renewal_v(&l, r, InversionMethod::GaverStehfest).unwrap();
        worst = worst.max(rel(v, 2.0 * (r / PI).sqrt()));
    }
    outcome(worst <= 1e-3, format!("max rel error {worst:.2e}"))
}

fn c4_profiles() -> Outcome {
    let models = [
        PhiModel::stable(1.0),
        PhiModel::mixture(&[(1.0, 1.0), (1.0, 0.8)]),
        PhiModel::section_six(section6_build_f(4, 0.05, Continuity::Multiplicative).unwrap()),
    ];
    let t_grid = log_grid(1e-6, 1.0, 4);
    let r_grid = log_grid(1e-4, 1.0, 4);
    let mut ok = true;
    let mut parts = Vec::new();
    for phi in models {
        let p = ProcessModel::new(2, phi.clone());
        let mu = asymp_ratio_profile(&p, AsympKind::Mu, &t_grid).unwrap().spread();
        let tail = asymp_ratio_profile(&p, AsympKind::Tail, &t_grid).unwrap().spread();
        let j = asymp_ratio_profile(&p, AsympKind::J, &r_grid).unwrap().spread();
        ok &= mu <= 10.0 && tail <= 10.0 && j <= 50.0;
        parts.push(format!("{}: mu {mu:.2} tail {tail:.2} j {j:.2}", phi.label()));
    }
    outcome(ok, parts.join(", "))
}

fn c5_section6() -> Outcome {
    let spec = QuadSpec::with_rel_tol(1e-9);
    let deg = PiecewiseSchedule::degenerate();
    let mut worst: f64 = 0.0;
    for lam in log_grid(1e-2, 1e6, 5) {
        worst = worst.max(rel(stieltjes_g(&deg, lam, &spec).unwrap(), PI / (2.0 * lam.sqrt())));
    }
    let s = section6_build_f(4, 0.05, Continuity::Multiplicative).unwrap();
    let (c1, c2) = g_bounds(&s, &log_grid(2.0, 1e6, 10), &spec).unwrap();
    let grid = CertGrid::default();
    let phi = PhiModel::section_six(s).tabulate(0.1, 10.0 * grid.lambda_max * grid.r_max, 40).unwrap();
    let c = scaling_certificate(&phi, 1.0, &grid).unwrap();
    let ok = worst <= 1e-5
        && (c.delta1 - 1.0 / 3.0).abs() <= 0.05
        && (c.delta2 - 0.5).abs() <= 0.05
        && c1.is_finite()
        && c2.is_finite()
        && c1 > 0.0
        && c2 > 0.0;
    outcome(
        ok,
        format!(
            "degenerate rel error {worst:.1e}, delta1 {:.4}, delta2 {:.4}, c1 {c1:.4}, c2 {c2:.4}",
            c.delta1, c.delta2
        ),
    )
}

fn c6_exact_sampler() -> Outcome {
    // From the center, s = 1 - 1/|Y|^2 is Beta(1 - a/2, a/2) in every dimension.
    let alpha = 1.0;
    let s = cauchy_wos(2);
    let b = ExitBatch::generate(&s, &Geometry::ball(2, 1.0), &[0.0, 0.0], 1_000_000, 20_260_101).unwrap();
    let beta = Beta::new(1.0 - alpha / 2.0, alpha / 2.0).unwrap();
    let nb = 50;
    let edges: Vec<f64> = (0..=nb).map(|k| beta.inverse_cdf(k as f64 / nb as f64)).collect();
    let mut counts = vec![0u64; nb];
    for p in b.positions() {
        let r2: f64 = p.iter().map(|v| v * v).sum();
        let sv = 1.0 - 1.0 / r2;
        let k = edges[1..nb].partition_point(|e| *e <= sv);
        counts[k] += 1;
    }
    let (stat, pval) = chi_square(&counts, &vec![1.0 / nb as f64; nb]);

    let m = ProcessModel::new(1, PhiModel::stable(1.0));
    let ts = ExitSampler::new(&m, Strategy::Timestep, SamplerParams { c_h: 0.005, ..SamplerParams::default() }).unwrap();
    let e = expected_exit_time(&ts, &Geometry::ball(1, 1.0), &[0.0], 1_000_000, 20_260_102).unwrap();
    let time_ok = (e.mean - 1.0).abs() <= 3.0 * e.stderr && !e.unreliable();
    outcome(
        pval > 0.01 && time_ok,
        format!(
            "chi2 {stat:.1} on {} dof (p = {pval:.3}); E tau = {:.5} +- {:.5} (timestep, c_h = 0.005)",
            nb - 1,
            e.mean,
            e.stderr
        ),
    )
}

fn c7_poisson_kernel() -> Outcome {
    let rep = poisson_kernel_check(&cauchy_wos(2), &PoissonKernelConfig::default(), 7).unwrap();
    let spreads: Vec<String> = ["upper_spread", "lower_spread", "comparability_spread", "near_spread"]
        .iter()
        .map(|k| format!("{k} {:.3}", constant(&rep, k)))
        .collect();
    outcome(rep.passed(), format!("{}; {}", spreads.join(", "), failing_checks(&rep)))
}

fn c8_exit_time() -> Outcome {
    let cfg = ExitTimeConfig {
        n: 100_000,
        ..ExitTimeConfig::default()
    };
    let rep = exit_time_profile_check(&cauchy_wos(2), &cfg, 8).unwrap();
    outcome(
        rep.passed(),
        format!(
            "lower spread {:.3}, upper spread {:.3}, subdomain max {:.3}; {}",
            constant(&rep, "lower_spread"),
            constant(&rep, "upper_spread"),
            constant(&rep, "subdomain_max"),
            failing_checks(&rep)
        ),
    )
}

fn c9_harnack() -> Outcome {
    let cfg = HarnackConfig {
        n: 100_000,
        ..HarnackConfig::default()
    };
    let s = cauchy_wos(2);
    let a = harnack_experiment(&s, &cfg, 9).unwrap();
    let b = harnack_experiment(&s, &cfg, 10_009).unwrap();
    let meta = seed_stability(&a, &b, &stability_keys(ExperimentKind::Harnack), 0.25);
    let finite = [&a, &b].iter().all(|r| constant(r, "max_ratio").is_finite());
    outcome(
        a.passed() && b.passed() && meta.passed() && finite,
        format!(
            "max ratio {:.3} / {:.3}, seed rel diff {:.3} over {} constants",
            constant(&a, "max_ratio"),
            constant(&b, "max_ratio"),
            constant(&meta, "max_rel_diff"),
            constant(&meta, "compared")
        ),
    )
}

fn c10_factorization() -> Outcome {
    let rep = factorization_experiment(&cauchy_wos(2), &FactorizationConfig::default(), 10).unwrap();
    let cs: Vec<String> = rep
        .constants
        .iter()
        .filter(|(k, _)| k.starts_with("C@") || k.starts_with("max_z@") || k == "C_spread")
        .map(|(k, v)| format!("{k} {v:.3}"))
        .collect();
    outcome(rep.passed(), format!("{}; {}", cs.join(", "), failing_checks(&rep)))
}

fn c11_bhp() -> Outcome {
    let rep = bhp_experiment(&cauchy_wos(2), &BhpConfig::default(), 11).unwrap();
    let cs: Vec<String> = rep
        .constants
        .iter()
        .filter(|(k, _)| k.contains("_spread") || k == "max_constant")
        .map(|(k, v)| format!("{k} {v:.3}"))
        .collect();
    outcome(rep.passed(), format!("{}; {}", cs.join(", "), failing_checks(&rep)))
}

fn small(kind: ExperimentKind) -> RunConfig {
    let mut c = RunConfig::new(kind);
    c.seed = 12;
    c.n = Some(match kind {
        ExperimentKind::Bhp => 2_000,
        ExperimentKind::SimExit => 5_000,
        _ => 10_000,
    });
    c
}

fn csv_body(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(format!("{name}.csv"))).unwrap()
}

fn c12_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let kinds = [
        ExperimentKind::SimExit,
        ExperimentKind::Kernel,
        ExperimentKind::PoissonKernel,
        ExperimentKind::Harnack,
        ExperimentKind::Factorization,
        ExperimentKind::Bhp,
        ExperimentKind::ExitTime,
        ExperimentKind::LadderInterval,
    ];
    let mut bad = Vec::new();
    for k in kinds {
        let cfg = small(k);
        let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
        let (o1, o2) = (run(&cfg, &d1), run(&cfg, &d2));
        if o1.status == RunStatus::Error || o2.status == RunStatus::Error {
            bad.push(format!("{} errored: {:?}", k.name(), o1.error.or(o2.error)));
            continue;
        }
        if csv_body(&d1, k.name()) != csv_body(&d2, k.name()) {
            bad.push(format!("{} differs between runs", k.name()));
        }
    }
    // worker count must not change the bytes either
    let cfg_path = tmp.path().join("bhp.toml");
    std::fs::write(&cfg_path, small(ExperimentKind::Bhp).emit().unwrap()).unwrap();
    let mut bodies = Vec::new();
    for w in ["1", "3"] {
        let out = tmp.path().join(format!("w{w}"));
        let st = Command::new(env!("CARGO_BIN_EXE_harnack"))
            .args(["verify", "bhp", "--workers", w, "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        if st.status.code() == Some(3) {
            bad.push(format!("cli bhp with {w} workers errored"));
        }
        bodies.push(std::fs::read(out.join("bhp.csv")).unwrap_or_default());
    }
    if bodies[0].is_empty() || bodies[0] != bodies[1] {
        bad.push("cli bhp CSV depends on --workers".into());
    }
    let n = kinds.len() + 1;
    if bad.is_empty() {
        outcome(true, format!("{n} byte-identical CSV comparisons"))
    } else {
        outcome(false, bad.join("; "))
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("subordination oracle", c1_subordination),
        ("ladder oracle", c2_ladder),
        ("renewal oracle", c3_renewal),
        ("Levy density profiles", c4_profiles),
        ("oscillating-index construction", c5_section6),
        ("exact exit sampler", c6_exact_sampler),
        ("Poisson kernel bounds", c7_poisson_kernel),
        ("exit-time envelopes", c8_exit_time),
        ("Harnack inequality", c9_harnack),
        ("factorization", c10_factorization),
        ("uniform boundary Harnack", c11_bhp),
        ("determinism", c12_determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {:>2} {:<32} {} ({:.1}s): {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
