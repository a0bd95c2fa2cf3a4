use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mdfield_cli::{
    exit, preset, preset_names, preset_source, run_exactcheck, run_experiment, CliError,
    ExperimentConfig, FixtureSource, RunOptions, Verdict,
};

/// Monte Carlo and exact checks for stationary martingale-difference fields.
#[derive(Parser, Debug)]
#[command(name = "mdfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in experiment; see `presets`.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Overrides the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for reports and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write its report.
    Run,
    /// Run the exact-algebra fixtures and the torus parity table.
    Exactcheck {
        /// Directory of fixture files instead of the bundled set.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// List presets, or print one as a config file.
    Presets {
        /// Preset to print.
        name: Option<String>,
    },
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    let cfg = match (&cli.config, &cli.preset) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("pass either --config or --preset, not both".into()))
        }
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => return Err(CliError::Config("run needs --config or --preset".into())),
    };
    let opts = RunOptions {
        threads: cli.threads,
        out: cli.out.clone(),
        seed: cli.seed,
        dry: false,
    };
    let outcome = run_experiment(&cfg, &opts)?;
    let r = &outcome.report;
    println!(
        "{}: {} over {}, R = {}, seed = {}",
        r.name,
        r.statistic.name(),
        r.window,
        r.replicates,
        r.seed
    );
    println!(
        "  mean {:.6}  variance {:.6}",
        r.moments.mean, r.moments.variance
    );
    for o in r.outcomes() {
        println!(
            "  [{}] {} vs {}: {:.6} (tolerance {})",
            if o.pass { "pass" } else { "FAIL" },
            o.kind,
            o.reference,
            o.value,
            o.tolerance
        );
    }
    if let Some(dir) = &outcome.out_dir {
        println!("  artifacts in {}", dir.display());
    }
    Ok(match r.verdict {
        Verdict::Pass => {
            println!("verdict: pass");
            exit::PASS
        }
        Verdict::Fail => {
            println!("verdict: fail");
            exit::STATISTICAL_FAILURE
        }
    })
}

fn exactcheck(fixtures: &Option<PathBuf>) -> Result<u8, CliError> {
    let source = match fixtures {
        Some(dir) => FixtureSource::Directory(dir.clone()),
        None => FixtureSource::Bundled,
    };
    let summary = run_exactcheck(&source)?;
    for f in &summary.fixtures {
        let status = if f.all_passed() { "pass" } else { "FAIL" };
        println!("[{status}] {} ({})", f.fixture, f.kind);
        for r in f.reports.iter().filter(|r| !r.passed()) {
            let witness = serde_json::to_string(&r).expect("report serializes");
            println!("    {witness}");
        }
    }
    let bad: Vec<_> = summary.parity.iter().filter(|p| !p.holds()).collect();
    match bad.first() {
        None => println!("[pass] torus parity, n = 0..={}", summary.parity.len() - 1),
        Some(p) => println!("[FAIL] torus parity at n = {}: a = {}, c = {}", p.n, p.a, p.c),
    }
    Ok(if summary.all_passed() {
        exit::PASS
    } else {
        exit::STATISTICAL_FAILURE
    })
}

fn presets(name: &Option<String>) -> Result<u8, CliError> {
    match name {
        Some(n) => {
            let text = preset_source(n).ok_or_else(|| CliError::UnknownPreset(n.clone()))?;
            print!("{text}");
        }
        None => {
            for n in preset_names() {
                let cfg = preset(n)?;
                println!("{n:<16} {} over {}, R = {}", cfg.statistic.name(), cfg.window, cfg.replicates);
            }
        }
    }
    Ok(exit::PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run => run(&cli),
        Command::Exactcheck { fixtures } => exactcheck(fixtures),
        Command::Presets { name } => presets(name),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::USAGE)
        }
    }
}
