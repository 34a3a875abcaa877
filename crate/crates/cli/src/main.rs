//! `obstacle-lab`: run, validate and plan configuration-driven experiments.

mod config;
mod plan;
mod run;
mod validate;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use config::Violation;

const EXIT_IO: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "obstacle-lab", version, about = "Inverse obstacle experiments for coupled elliptic systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Random seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment and write its CSV artifacts and manifest.
    Run,
    /// Check schema and invariants without solving.
    Validate,
    /// Expand the `[plan]` table into one config per combination.
    Plan,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn fail(out: Option<&Path>, code: u8, record: serde_json::Value) -> ExitCode {
    let line = record.to_string();
    eprintln!("{line}");
    if let Some(d) = out {
        let _ = fs::create_dir_all(d);
        let _ = fs::write(d.join("error.json"), format!("{line}\n"));
    }
    ExitCode::from(code)
}

fn schema_error(out: Option<&Path>, v: &Violation) -> ExitCode {
    fail(
        out,
        EXIT_SCHEMA,
        json!({"status": "error", "code": EXIT_SCHEMA, "kind": "schema", "path": v.path, "message": v.message}),
    )
}

fn read_config(cli: &Cli) -> Result<(PathBuf, String), ExitCode> {
    let Some(path) = cli.config.clone() else {
        return Err(schema_error(None, &Violation::new("--config", "a configuration file is required")));
    };
    match fs::read_to_string(&path) {
        Ok(t) => Ok((path, t)),
        Err(e) => Err(schema_error(None, &Violation::new("--config", format!("cannot read {}: {e}", path.display())))),
    }
}

fn out_dir(cli: &Cli, cfg: &config::ExperimentConfig, config_path: &Path) -> PathBuf {
    if let Some(o) = &cli.out {
        return o.clone();
    }
    match &cfg.output {
        Some(o) => config_path.parent().unwrap_or(Path::new(".")).join(o),
        None => PathBuf::from("out"),
    }
}

fn cmd_validate(cli: &Cli) -> ExitCode {
    let (_, text) = match read_config(cli) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(v) => {
            println!("violation {v}");
            return ExitCode::SUCCESS;
        }
    };
    let report = validate::validate(&cfg, cli.out.as_deref(), true);
    print!("{}", report.render());
    ExitCode::SUCCESS
}

fn cmd_plan(cli: &Cli) -> ExitCode {
    let (_, text) = match read_config(cli) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("plan"));
    let runs = match plan::expand(&text) {
        Ok(r) => r,
        Err(v) => return schema_error(Some(&out), &v),
    };
    if let Err(e) = fs::create_dir_all(&out) {
        return fail(None, EXIT_IO, json!({"status": "error", "code": EXIT_IO, "kind": "io", "message": e.to_string()}));
    }
    for r in &runs {
        if let Err(e) = fs::write(out.join(format!("{}.toml", r.name)), &r.text) {
            return fail(None, EXIT_IO, json!({"status": "error", "code": EXIT_IO, "kind": "io", "message": e.to_string()}));
        }
    }
    let _ = fs::write(out.join("plan.csv"), plan::index_csv(&runs));
    println!("{} configurations written to {}", runs.len(), out.display());
    ExitCode::SUCCESS
}

fn cmd_run(cli: &Cli) -> ExitCode {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let clock = Instant::now();
    let (path, text) = match read_config(cli) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let mut cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(v) => return schema_error(cli.out.as_deref(), &v),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = out_dir(cli, &cfg, &path);
    if let Err(e) = fs::create_dir_all(&out) {
        return fail(None, EXIT_IO, json!({"status": "error", "code": EXIT_IO, "kind": "io", "message": e.to_string()}));
    }
    let _ = fs::remove_file(out.join("error.json"));
    let report = validate::validate(&cfg, Some(&out), cfg.coefficients.is_some());
    if let Some(v) = report.violations.first() {
        return schema_error(Some(&out), v);
    }
    if let Some(n) = cli.jobs {
        if n == 0 {
            return schema_error(Some(&out), &Violation::new("--jobs", "must be at least 1"));
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let write = |arts: &[run::Artifact]| -> std::io::Result<Vec<serde_json::Value>> {
        let mut listed = Vec::new();
        for a in arts {
            fs::write(out.join(&a.name), &a.body)?;
            listed.push(json!({"name": a.name, "bytes": a.body.len(), "sha256": sha256_hex(a.body.as_bytes())}));
        }
        Ok(listed)
    };
    match run::run(&cfg) {
        Ok(outcome) => {
            let listed = match write(&outcome.artifacts) {
                Ok(l) => l,
                Err(e) => {
                    return fail(Some(&out), EXIT_IO, json!({"status": "error", "code": EXIT_IO, "kind": "io", "message": e.to_string()}))
                }
            };
            let timings: serde_json::Map<String, serde_json::Value> = outcome
                .timings
                .iter()
                .enumerate()
                .map(|(i, (k, v))| (format!("{i:02}-{k}"), json!(v)))
                .collect();
            let manifest = json!({
                "tool": "obstacle-lab",
                "cli_version": env!("CARGO_PKG_VERSION"),
                "core_version": obstacle_lab::VERSION,
                "kind": cfg.kind.to_string(),
                "seed": cfg.seed,
                "jobs": cli.jobs,
                "config_path": path.display().to_string(),
                "config_sha256": sha256_hex(text.as_bytes()),
                "config": text,
                "mu1": report.mu1,
                "notes": report.notes,
                "started_unix": started,
                "timings_seconds": timings,
                "total_seconds": clock.elapsed().as_secs_f64(),
                "artifacts": listed,
                "summary": outcome.summary,
            });
            let _ = fs::write(out.join("manifest.json"), format!("{}\n", serde_json::to_string_pretty(&manifest).unwrap_or_default()));
            println!("{}: {}", cfg.kind, outcome.summary);
            ExitCode::SUCCESS
        }
        Err(f) => {
            let _ = write(&f.partial);
            fail(
                Some(&out),
                EXIT_NUMERICAL,
                json!({"status": "error", "code": EXIT_NUMERICAL, "kind": "numerical", "module": f.module, "message": f.error.to_string()}),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run => cmd_run(&cli),
        Command::Validate => cmd_validate(&cli),
        Command::Plan => cmd_plan(&cli),
    }
}
