use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use harnack_core::cli::{parse_config, run, seed_stability, stability_keys, ExperimentKind, RunConfig, RunStatus};

#[derive(Parser)]
#[command(name = "harnack", version, about = "Bernstein functions, jump kernels and Monte Carlo Harnack checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    group: Group,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the configured sample count.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Caps worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (default: the configured `out`).
    #[arg(long, global = true, env = "HARNACK_OUT")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Group {
    /// The symbol phi.
    Phi {
        #[command(subcommand)]
        op: PhiOp,
    },
    /// Levy densities and their asymptotics.
    Levy {
        #[command(subcommand)]
        op: LevyOp,
    },
    /// Ladder exponent, renewal function, interval exit times.
    Ladder {
        #[command(subcommand)]
        op: LadderOp,
    },
    /// Exit sampling.
    Sim {
        #[command(subcommand)]
        op: SimOp,
    },
    /// Verification batteries.
    Verify {
        #[command(subcommand)]
        op: VerifyOp,
    },
    /// Seed-stability meta-check: run an experiment under two seeds and compare its constants.
    Report {
        /// Experiment name, e.g. bhp, harnack, factorization.
        experiment: String,
        /// Second seed (default: first seed + 1).
        #[arg(long)]
        seed_b: Option<u64>,
        #[arg(long, default_value_t = 0.25)]
        tolerance: f64,
    },
}

#[derive(Subcommand, Clone, Copy)]
enum PhiOp {
    Eval,
    Cert,
    Section6,
}

#[derive(Subcommand, Clone, Copy)]
enum LevyOp {
    J,
    Mu,
    Asymp,
}

#[derive(Subcommand, Clone, Copy)]
enum LadderOp {
    Kappa,
    Renewal,
    Interval,
}

#[derive(Subcommand, Clone, Copy)]
enum SimOp {
    Exit,
    ExitTime,
    /// Poisson kernel histogram of one domain and start point.
    Kernel,
}

#[derive(Subcommand, Clone, Copy)]
enum VerifyOp {
    Kernel,
    Harnack,
    Factorization,
    Bhp,
    ExitTime,
}

fn kind_of(g: &Group) -> Option<ExperimentKind> {
    use ExperimentKind as E;
    Some(match g {
        Group::Phi { op } => match op {
            PhiOp::Eval => E::PhiEval,
            PhiOp::Cert => E::PhiCert,
            PhiOp::Section6 => E::PhiSection6,
        },
        Group::Levy { op } => match op {
            LevyOp::J => E::LevyJ,
            LevyOp::Mu => E::LevyMu,
            LevyOp::Asymp => E::LevyAsymp,
        },
        Group::Ladder { op } => match op {
            LadderOp::Kappa => E::LadderKappa,
            LadderOp::Renewal => E::LadderRenewal,
            LadderOp::Interval => E::LadderInterval,
        },
        Group::Sim { op } => match op {
            SimOp::Exit => E::SimExit,
            SimOp::ExitTime => E::SimExitTime,
            SimOp::Kernel => E::Kernel,
        },
        Group::Verify { op } => match op {
            VerifyOp::Kernel => E::PoissonKernel,
            VerifyOp::Harnack => E::Harnack,
            VerifyOp::Factorization => E::Factorization,
            VerifyOp::Bhp => E::Bhp,
            VerifyOp::ExitTime => E::ExitTime,
        },
        Group::Report { .. } => return None,
    })
}

fn load(common: &Common, kind: ExperimentKind) -> Result<RunConfig, String> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            let cfg = parse_config(&text).map_err(|e| format!("{}: {e}", p.display()))?;
            if cfg.experiment != kind {
                return Err(format!(
                    "{} configures experiment '{}', not '{}'",
                    p.display(),
                    cfg.experiment.name(),
                    kind.name()
                ));
            }
            cfg
        }
        None => RunConfig::new(kind),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.n.is_some() {
        cfg.n = common.n;
    }
    Ok(cfg)
}

fn out_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out))
}

fn finish(status: RunStatus, what: &str, files: &[PathBuf], error: Option<&str>) -> ExitCode {
    println!("{what}: {}", status.name());
    for f in files {
        println!("  wrote {}", f.display());
    }
    if let Some(e) = error {
        eprintln!("error: {e}");
    }
    ExitCode::from(status.exit_code() as u8)
}

fn run_one(cfg: &RunConfig, dir: &Path) -> ExitCode {
    let o = run(cfg, dir);
    if let Some(rep) = &o.report {
        for c in &rep.checks {
            println!("  {} {}", c.status.name(), c.name);
        }
    }
    finish(o.status, cfg.experiment.name(), &o.files, o.error.as_deref())
}

fn report(common: &Common, experiment: &str, seed_b: Option<u64>, tol: f64) -> ExitCode {
    let Some(kind) = ExperimentKind::ALL.into_iter().find(|k| k.name() == experiment) else {
        return finish(RunStatus::Error, "report", &[], Some(&format!("unknown experiment '{experiment}'")));
    };
    let cfg_a = match load(common, kind) {
        Ok(c) => c,
        Err(e) => return finish(RunStatus::Error, "report", &[], Some(&e)),
    };
    let mut cfg_b = cfg_a.clone();
    cfg_b.seed = seed_b.unwrap_or(cfg_a.seed.wrapping_add(1));
    let dir = out_dir(common, &cfg_a);
    let mut files = Vec::new();
    let mut reps = Vec::new();
    for c in [&cfg_a, &cfg_b] {
        let o = run(c, &dir.join(format!("seed_{}", c.seed)));
        files.extend(o.files);
        match o.report {
            Some(r) if o.status != RunStatus::Error => reps.push(r),
            _ => return finish(RunStatus::Error, "report", &files, o.error.as_deref()),
        }
    }
    let meta = seed_stability(&reps[0], &reps[1], &stability_keys(kind), tol);
    let name = &meta.name;
    let csv = dir.join(format!("{name}.csv"));
    let summary = dir.join(format!("{name}.summary"));
    let mut buf = Vec::new();
    let mut sbuf = Vec::new();
    let res = meta
        .write_csv(&mut buf)
        .and_then(|_| meta.write_summary(&mut sbuf, None))
        .map_err(|e| e.to_string())
        .and_then(|_| std::fs::write(&csv, &buf).map_err(|e| e.to_string()))
        .and_then(|_| std::fs::write(&summary, &sbuf).map_err(|e| e.to_string()));
    if let Err(e) = res {
        return finish(RunStatus::Error, "report", &files, Some(&e));
    }
    files.push(csv);
    files.push(summary);
    for (k, v) in &meta.constants {
        println!("  {k} = {v}");
    }
    finish(meta.status().into(), name, &files, None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.common.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            return finish(RunStatus::Error, "harnack", &[], Some(&e.to_string()));
        }
    }
    match (&cli.group, kind_of(&cli.group)) {
        (Group::Report { experiment, seed_b, tolerance }, _) => report(&cli.common, experiment, *seed_b, *tolerance),
        (_, Some(kind)) => match load(&cli.common, kind) {
            Ok(cfg) => run_one(&cfg, &out_dir(&cli.common, &cfg)),
            Err(e) => finish(RunStatus::Error, kind.name(), &[], Some(&e)),
        },
        (_, None) => unreachable!("every group but report names an experiment"),
    }
}
