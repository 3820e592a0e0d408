//! Seeded sweeps over total platoon vehicles and allocation methods.
//!
//! Every (total, seed) pair fixes one scenario that all methods are run on.
//! Work items run in parallel; results are sorted before aggregation so the
//! output does not depend on scheduling.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{Allocation, Method, ScenarioEnv};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_with_fading, MetricsReport};
use crate::scenario::{generate_scenario, ModelParams, Scenario};

pub const DEFAULT_SEED_COUNT: u64 = 20;

pub const CSV_HEADER: &str = "total_vehicles,method,seed_count,latency_ms_mean,latency_ms_std,qos_rate_mean,subchannels_mean,spectral_eff_mean,coverage_failures";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub params: ModelParams,
    pub vehicle_totals: Vec<usize>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// Fading draws per member for the Monte Carlo reliability; 0 disables it.
    pub monte_carlo_fading_draws: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            params: ModelParams::default(),
            vehicle_totals: SweepConfig::default_totals(),
            methods: Method::ALL.to_vec(),
            seeds: (0..DEFAULT_SEED_COUNT).collect(),
            monte_carlo_fading_draws: 0,
        }
    }
}

impl SweepConfig {
    pub fn default_totals() -> Vec<usize> {
        (15..=55).step_by(5).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.vehicle_totals.is_empty() || self.methods.is_empty() || self.seeds.is_empty() {
            return Err(Error::InvalidSweep("totals, methods and seeds must be non-empty".into()));
        }
        let p = &self.params;
        for &t in &self.vehicle_totals {
            if t < 2 * p.num_platoons || t > p.max_platoon_size * p.num_platoons {
                return Err(Error::InvalidSweep(format!(
                    "total {t} cannot be split over {} platoons of 2..={} vehicles",
                    p.num_platoons, p.max_platoon_size
                )));
            }
        }
        Ok(())
    }
}

/// Scenario seed shared by every total and method of one sweep seed, so
/// sweep points differ only in platoon sizes.
pub fn scenario_seed(seed: u64) -> u64 {
    ChaCha8Rng::seed_from_u64(seed).next_u64()
}

fn fading_rng(scenario_seed: u64, total: usize, method: Method) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario_seed);
    rng.set_stream(1 + (total * Method::ALL.len() + method as usize) as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub total_vehicles: usize,
    pub method: Method,
    pub seed: u64,
    pub report: MetricsReport,
}

/// What an observer sees for each finished run.
pub struct RunArtifacts<'a> {
    pub total_vehicles: usize,
    pub method: Method,
    pub seed: u64,
    pub scenario: &'a Scenario,
    pub allocation: &'a Allocation,
}

/// Aggregate over seeds for one (total, method) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub total_vehicles: usize,
    pub method: Method,
    pub seed_count: usize,
    pub latency_ms_mean: f64,
    pub latency_ms_std: f64,
    pub qos_rate_mean: f64,
    pub subchannels_mean: f64,
    pub spectral_eff_mean: f64,
    /// Summed over seeds.
    pub coverage_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityRow {
    pub total_vehicles: usize,
    pub method: Method,
    pub seed_count: usize,
    pub closed_form_mean: f64,
    pub monte_carlo_mean: f64,
    pub satisfied_rate_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    /// Sorted by (total, method, seed).
    pub runs: Vec<RunRecord>,
    pub rows: Vec<SweepRow>,
}

impl SweepResults {
    pub fn row(&self, total: usize, method: Method) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.total_vehicles == total && r.method == method)
    }

    pub fn reliability_rows(&self) -> Vec<ReliabilityRow> {
        self.rows
            .iter()
            .map(|row| {
                let runs: Vec<&MetricsReport> = self
                    .runs
                    .iter()
                    .filter(|r| r.total_vehicles == row.total_vehicles && r.method == row.method)
                    .map(|r| &r.report)
                    .collect();
                ReliabilityRow {
                    total_vehicles: row.total_vehicles,
                    method: row.method,
                    seed_count: runs.len(),
                    closed_form_mean: mean(runs.iter().map(|r| r.mean_reliability)),
                    monte_carlo_mean: mean(runs.iter().map(|r| r.mc_reliability.unwrap_or(f64::NAN))),
                    satisfied_rate_mean: mean(runs.iter().map(|r| r.reliability_satisfied_rate)),
                }
            })
            .collect()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Generates, allocates, validates and evaluates one sweep point for every method.
pub fn run_point(
    config: &SweepConfig,
    total: usize,
    seed: u64,
    observer: &(dyn Fn(&RunArtifacts<'_>) -> Result<()> + Sync),
) -> Result<Vec<RunRecord>> {
    let ctx = |method: Option<Method>| match method {
        Some(m) => format!("total {total}, method {m}, seed {seed}"),
        None => format!("total {total}, seed {seed}"),
    };
    let s_seed = scenario_seed(seed);
    let scenario = generate_scenario(&config.params, total, s_seed).map_err(|e| e.context(ctx(None)))?;
    let env = ScenarioEnv::new(&scenario).map_err(|e| e.context(ctx(None)))?;
    config
        .methods
        .iter()
        .map(|&method| {
            let allocation = method.allocate(&env);
            allocation.validate_for(&scenario).map_err(|e| e.context(ctx(Some(method))))?;
            let mut rng = fading_rng(s_seed, total, method);
            let report = evaluate_with_fading(&env, &allocation, config.monte_carlo_fading_draws, &mut rng);
            observer(&RunArtifacts { total_vehicles: total, method, seed, scenario: &scenario, allocation: &allocation })
                .map_err(|e| e.context(ctx(Some(method))))?;
            Ok(RunRecord { total_vehicles: total, method, seed, report })
        })
        .collect()
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResults> {
    run_sweep_with(config, &|_| Ok(()))
}

pub fn run_sweep_with(
    config: &SweepConfig,
    observer: &(dyn Fn(&RunArtifacts<'_>) -> Result<()> + Sync),
) -> Result<SweepResults> {
    config.validate()?;
    let points: Vec<(usize, u64)> = config
        .vehicle_totals
        .iter()
        .flat_map(|&t| config.seeds.iter().map(move |&s| (t, s)))
        .collect();
    let mut runs: Vec<RunRecord> = points
        .par_iter()
        .map(|&(t, s)| run_point(config, t, s, observer))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    runs.sort_by(|a, b| {
        (a.total_vehicles, a.method, a.seed).cmp(&(b.total_vehicles, b.method, b.seed))
    });
    let rows = aggregate(&runs);
    Ok(SweepResults { runs, rows })
}

fn aggregate(runs: &[RunRecord]) -> Vec<SweepRow> {
    runs.chunk_by(|a, b| a.total_vehicles == b.total_vehicles && a.method == b.method)
        .map(|group| {
            let latencies: Vec<f64> = group
                .iter()
                .map(|r| r.report.avg_latency_ms)
                .filter(|l| l.is_finite())
                .collect();
            let latency_ms_mean = if latencies.is_empty() {
                f64::INFINITY
            } else {
                latencies.iter().sum::<f64>() / latencies.len() as f64
            };
            SweepRow {
                total_vehicles: group[0].total_vehicles,
                method: group[0].method,
                seed_count: group.len(),
                latency_ms_mean,
                latency_ms_std: std_dev(&latencies),
                qos_rate_mean: mean(group.iter().map(|r| r.report.qos_satisfaction_rate)),
                subchannels_mean: mean(group.iter().map(|r| r.report.allocated_subchannels as f64)),
                spectral_eff_mean: mean(group.iter().map(|r| r.report.spectral_efficiency)),
                coverage_failures: group.iter().map(|r| r.report.coverage_failures).sum(),
            }
        })
        .collect()
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyResults);
    }
    let file = File::create(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one line per (total, method) under `CSV_HEADER`.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_rows(rows, path)
}

pub fn emit_reliability_csv(rows: &[ReliabilityRow], path: &Path) -> Result<()> {
    write_rows(rows, path)
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?)
}

/// Renders rows to a string in the same format `emit_csv` writes.
pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let mut bytes = w.into_inner().map_err(|e| Error::from(e.into_error()))?;
    bytes.flush()?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
