use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use platoon_core::sweep::{emit_csv, emit_reliability_csv, run_sweep_with, RunArtifacts};
use platoon_core::{Allocation, ConfigFile, Method, Scenario};

#[derive(Parser, Debug)]
#[command(name = "platoon-sim", version, about = "Seeded allocation sweeps for multi-platoon groupcasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a sweep over total platoon vehicles and write the aggregate CSV.
    Simulate(SimulateArgs),
    /// Reload dumped scenarios and allocations and re-check every allocation.
    Validate {
        #[arg(long)]
        dump_dir: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct SimulateArgs {
    /// TOML parameter file.
    #[arg(long)]
    config: PathBuf,
    /// `first..last:step` (inclusive) or a comma-separated list.
    #[arg(long, value_parser = parse_totals)]
    totals: Option<Totals>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Number of seeds, numbered from 0.
    #[arg(long)]
    seeds: Option<u64>,
    /// Rayleigh draws per member for the Monte Carlo reliability; 0 disables it.
    #[arg(long)]
    mc_draws: Option<usize>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    /// Write every scenario and allocation as JSON here.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
struct Totals(Vec<usize>);

fn parse_totals(s: &str) -> Result<Totals, String> {
    let bad = |e: std::num::ParseIntError| format!("invalid total in `{s}`: {e}");
    if let Some((range, step)) = s.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or_else(|| format!("expected first..last:step, got `{s}`"))?;
        let (lo, hi, step): (usize, usize, usize) = (
            lo.trim().parse().map_err(bad)?,
            hi.trim().parse().map_err(bad)?,
            step.trim().parse().map_err(bad)?,
        );
        if step == 0 || lo > hi {
            return Err(format!("empty or endless range `{s}`"));
        }
        Ok(Totals((lo..=hi).step_by(step).collect()))
    } else {
        s.split(',').map(|t| t.trim().parse().map_err(bad)).collect::<Result<_, _>>().map(Totals)
    }
}

fn scenario_file(dir: &Path, total: usize, seed: u64) -> PathBuf {
    dir.join(format!("scenario_t{total}_s{seed}.json"))
}

fn allocation_file(dir: &Path, total: usize, seed: u64, method: Method) -> PathBuf {
    dir.join(format!("allocation_t{total}_s{seed}_{method}.json"))
}

fn reliability_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}_reliability.csv"))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let file = ConfigFile::load(&args.config)?;
    let mut config = file.sweep_config()?;
    if let Some(Totals(totals)) = args.totals {
        config.vehicle_totals = totals;
    }
    if let Some(methods) = args.methods {
        config.methods = methods;
    }
    if let Some(n) = args.seeds {
        config.seeds = (0..n).collect();
    }
    if let Some(draws) = args.mc_draws {
        config.monte_carlo_fading_draws = draws;
    }
    config.validate()?;

    if let Some(dir) = &args.dump_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let first_method = config.methods[0];
    let dump = |run: &RunArtifacts<'_>| -> platoon_core::Result<()> {
        let Some(dir) = &args.dump_dir else { return Ok(()) };
        if run.method == first_method {
            run.scenario.save(&scenario_file(dir, run.total_vehicles, run.seed))?;
        }
        run.allocation.save(&allocation_file(dir, run.total_vehicles, run.seed, run.method))
    };
    let results = run_sweep_with(&config, &dump)?;
    emit_csv(&results.rows, &args.out)?;
    eprintln!("wrote {} rows to {}", results.rows.len(), args.out.display());
    if config.monte_carlo_fading_draws > 0 {
        let path = reliability_path(&args.out);
        emit_reliability_csv(&results.reliability_rows(), &path)?;
        eprintln!("wrote reliability table to {}", path.display());
    }
    Ok(())
}

fn validate(dir: &Path) -> Result<()> {
    let mut checked = 0usize;
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    entries.sort();
    for path in entries {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        let Some(rest) = name.strip_prefix("allocation_t").and_then(|r| r.strip_suffix(".json")) else {
            continue;
        };
        // rest = "{total}_s{seed}_{method}"
        let (total, rest) = rest.split_once("_s").context("malformed dump name")?;
        let (seed, _) = rest.split_once('_').context("malformed dump name")?;
        let scenario_path = dir.join(format!("scenario_t{total}_s{seed}.json"));
        let scenario = Scenario::load(&scenario_path).with_context(|| format!("loading {}", scenario_path.display()))?;
        let alloc = Allocation::load(&path).with_context(|| format!("loading {}", path.display()))?;
        alloc.validate_for(&scenario).with_context(|| format!("checking {name}"))?;
        checked += 1;
    }
    if checked == 0 {
        bail!("no allocation dumps in {}", dir.display());
    }
    eprintln!("{checked} allocations valid");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Validate { dump_dir } => validate(&dump_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_syntax() {
        assert_eq!(parse_totals("15..55:5").unwrap(), Totals(vec![15, 20, 25, 30, 35, 40, 45, 50, 55]));
        assert_eq!(parse_totals("15..17:1").unwrap(), Totals(vec![15, 16, 17]));
        assert_eq!(parse_totals("20, 30").unwrap(), Totals(vec![20, 30]));
        assert!(parse_totals("15..55:0").is_err());
        assert!(parse_totals("55..15:5").is_err());
        assert!(parse_totals("a,b").is_err());
    }

    #[test]
    fn reliability_file_sits_next_to_output() {
        assert_eq!(reliability_path(Path::new("out/run.csv")), PathBuf::from("out/run_reliability.csv"));
    }
}
