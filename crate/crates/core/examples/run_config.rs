//! Drive an experiment from a TOML config, as the `harnack` binary does.
use harnack_core::cli::{execute, parse_config};

const CONFIG: &str = r#"
experiment = "levy_asymp"
seed = 3

[model]
kind = "mixture"
components = [[1.0, 0.5], [2.0, 1.5]]

[grid]
lo = 1e-3
hi = 1e3
"#;

fn main() -> harnack_core::Result<()> {
    let cfg = parse_config(CONFIG)?;
    println!("defaulted: {}", cfg.defaulted.join(", "));
    let rep = execute(&cfg)?;
    for c in &rep.checks {
        println!("{} {}: {}", c.status.name(), c.name, c.detail);
    }
    println!("{}", rep.status().name());
    Ok(())
}
