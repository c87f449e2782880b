use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use wignerlab_core::io::write_atomic;
use wignerlab_core::verify::{Experiment, ExperimentConfig, ExperimentReport};

#[derive(Parser)]
#[command(name = "wignerlab", version, about = "Monte Carlo experiments on deformed Wigner matrices D + sqrt(t) W")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its report, CSV series and manifest.
    Run {
        experiment: String,
        /// Key-value configuration file (a manifest from an earlier run works too).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed; overrides `seed` from the file and the overrides.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Thread cap for sampling; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Configuration overrides of the form key=value.
        overrides: Vec<String>,
    },
    /// List the available experiments.
    List,
    /// Describe one experiment and print its default configuration.
    Describe { experiment: String },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<18} {}", e.name(), e.summary());
            }
            Ok(true)
        }
        Command::Describe { experiment } => {
            let exp: Experiment = experiment.parse()?;
            println!("{}: {}\n", exp.name(), exp.summary());
            println!("{}\n", exp.description());
            println!("Default configuration:");
            print!("{}", ExperimentConfig::new(exp).canonical());
            Ok(true)
        }
        Command::Run { experiment, config, seed, out, workers, overrides } => {
            let exp: Experiment = experiment.parse()?;
            let cfg = resolve(exp, config.as_deref(), seed, workers, &overrides)?;
            run(&cfg, config.as_deref(), &out)
        }
    }
}

fn resolve(
    exp: Experiment,
    path: Option<&Path>,
    seed: Option<u64>,
    workers: usize,
    overrides: &[String],
) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(exp);
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        cfg.apply_text(&text).with_context(|| format!("parsing {}", p.display()))?;
    }
    for kv in overrides {
        cfg.set_pair(kv).with_context(|| format!("override '{kv}'"))?;
    }
    if let Some(s) = seed {
        cfg.set("seed", &s.to_string())?;
    }
    cfg.workers = workers;
    Ok(cfg)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn run(cfg: &ExperimentConfig, config_path: Option<&Path>, out: &Path) -> Result<bool> {
    let exp = cfg.experiment();
    let dir = out.join(exp.name()).join(cfg.hash());
    let start = Instant::now();
    let report = exp.run(cfg).with_context(|| format!("running {}", exp.name()))?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut artifacts: Vec<(String, Vec<u8>)> = Vec::new();
    let mut json = report.to_json().context("serializing the report")?;
    json.push('\n');
    artifacts.push(("report.json".into(), json.into_bytes()));
    for s in &report.series {
        artifacts.push((format!("{}.csv", s.name), s.to_csv().into_bytes()));
    }
    for (name, bytes) in &artifacts {
        write_atomic(&dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
    }
    let manifest = manifest(cfg, config_path, &dir, &artifacts);
    write_atomic(&dir.join("manifest"), manifest.as_bytes()).context("writing manifest")?;
    let timing = format!("{{\n  \"wall_seconds\": {elapsed},\n  \"workers\": {}\n}}\n", cfg.workers);
    write_atomic(&dir.join("timing.json"), timing.as_bytes()).context("writing timing.json")?;

    summarize(&report);
    println!("wrote {} in {elapsed:.1} s", dir.display());
    Ok(report.passed())
}

/// Resolved configuration preceded by a commented header. Loadable with
/// `--config`; re-running it reproduces the checksummed artifacts.
fn manifest(cfg: &ExperimentConfig, config_path: Option<&Path>, dir: &Path, artifacts: &[(String, Vec<u8>)]) -> String {
    let mut m = String::from("# wignerlab run manifest\n");
    m.push_str(&format!("# config_path: {}\n", config_path.map_or("-".into(), |p| p.display().to_string())));
    m.push_str(&format!("# output_dir: {}\n", dir.display()));
    m.push_str(&format!("# seed: {}\n", cfg.seed()));
    m.push_str(&format!("# config_hash: {}\n", cfg.hash()));
    for (name, bytes) in artifacts {
        m.push_str(&format!("# sha256 {name} {}\n", sha256_hex(bytes)));
    }
    m.push_str(&cfg.canonical());
    m
}

fn summarize(report: &ExperimentReport) {
    for q in report.checks() {
        let verdict = if q.pass == Some(true) { "PASS" } else { "FAIL" };
        let rule = q.tolerance.as_ref().map_or("", |t| t.rule.as_str());
        println!("{verdict} {:<36} {:>14.6e}  {rule}", q.name, q.value);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
    let failed = report.failures().len();
    let total = report.checks().count();
    println!("{}/{} checks passed", total - failed, total);
}
