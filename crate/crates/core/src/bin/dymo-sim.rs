use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dymo::controller::SchemeKind;
use dymo::harness::{run, validate_estimators, RunConfig, Sweep};
use dymo::venue::ScenarioKind;

#[derive(Parser)]
#[command(name = "dymo-sim", version, about = "Multicast SNR threshold estimation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Reports per second.
    #[arg(long)]
    r: Option<f64>,
    /// Reporting intervals.
    #[arg(long)]
    duration: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sweep axis (m, p or r) and a comma-separated value list.
    #[arg(long, num_args = 2, value_names = ["AXIS", "VALUES"])]
    sweep: Option<Vec<String>>,
    #[arg(long)]
    instances: Option<u32>,
    /// Comma-separated scheme names.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<SchemeKind>>,
    #[arg(long)]
    mcs_table: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Instances run concurrently.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the estimators against their analytic properties.
    Validate,
}

fn resolve(cli: Cli) -> dymo::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = cli.scenario {
        cfg.scenario = v;
    }
    if let Some(v) = cli.m {
        cfg.m = v;
    }
    if let Some(v) = cli.p {
        cfg.p = v;
    }
    if let Some(v) = cli.r {
        cfg.r = v;
    }
    if let Some(v) = cli.duration {
        cfg.duration = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.sweep {
        cfg.sweep = Some(Sweep::parse(&v[0], &v[1])?);
    }
    if let Some(v) = cli.instances {
        cfg.instances = v;
    }
    if let Some(v) = cli.schemes {
        cfg.schemes = v;
    }
    if cli.mcs_table.is_some() {
        cfg.mcs_table = cli.mcs_table;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    if let Some(v) = cli.parallel {
        cfg.parallel = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Validate) => validate_estimators(cli.seed.unwrap_or(1)).map(|report| {
            print!("{report}");
            report.passed()
        }),
        None => resolve(cli).and_then(|cfg| run(&cfg)).map(|out| {
            if let Some(dir) = out.out_dir {
                println!("wrote {}", dir.display());
            }
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
