use std::thread;
use std::time::Duration;

use amg_reuse::io::{gen_diffusion_sequence, read_sequence, write_sequence};
use amg_reuse::reuse::{run_sequence, speedup_percent, LinearSystem, RunReport, StrategyConfig, StrategyKind};
use amg_reuse::sparse::SparseStructure;

use crate::config::{BenchConfig, Source};
use crate::BenchError;

/// Generates or reads the configured sequence, writing it out first if
/// `write_sequence` is set.
pub fn load_systems(config: &BenchConfig) -> Result<Vec<LinearSystem>, BenchError> {
    let systems = match &config.source {
        Source::Generated { spec, .. } => gen_diffusion_sequence(spec).map_err(BenchError::Load)?,
        Source::Directory(dir) => read_sequence(dir).map_err(BenchError::Load)?,
    };
    if let (Some(dir), Source::Generated { preset, spec }) = (&config.write_sequence, &config.source) {
        let comments = vec![format!(
            "amg-bench {} preset: grid {} contrast {} path_speed {} blob_sigma {} seed {}",
            preset.name(),
            spec.grid_n,
            spec.contrast,
            spec.path_speed,
            spec.blob_sigma,
            spec.seed
        )];
        write_sequence(dir, &systems, &comments).map_err(BenchError::Load)?;
    }
    Ok(systems)
}

/// Solutions and report of one strategy run.
type Run = (Vec<Vec<f64>>, RunReport);

/// Every run of one strategy.
#[derive(Debug, Clone)]
pub struct StrategyResult {
    pub strategy: StrategyConfig,
    /// One report per repetition.
    pub runs: Vec<RunReport>,
    /// Per-step solutions of the first repetition.
    pub solutions: Vec<Vec<f64>>,
}

impl StrategyResult {
    pub fn kind(&self) -> StrategyKind {
        self.strategy.kind
    }

    pub fn first(&self) -> &RunReport {
        &self.runs[0]
    }

    /// Median over repetitions of a per-run quantity.
    pub fn median(&self, f: impl Fn(&RunReport) -> Duration) -> Duration {
        let mut v: Vec<Duration> = self.runs.iter().map(f).collect();
        v.sort();
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2
        }
    }

    pub fn setup(&self) -> Duration {
        self.median(|r| r.total_setup)
    }

    pub fn solve(&self) -> Duration {
        self.median(|r| r.total_solve)
    }

    pub fn total(&self) -> Duration {
        self.median(|r| r.total_time())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInfo {
    pub steps: usize,
    /// Unknowns of the first step.
    pub unknowns: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub problem: ProblemInfo,
    /// In the order of [`BenchConfig::strategies`].
    pub results: Vec<StrategyResult>,
}

impl BenchOutcome {
    pub fn get(&self, kind: StrategyKind) -> Option<&StrategyResult> {
        self.results.iter().find(|r| r.kind() == kind)
    }

    pub fn baseline(&self) -> Option<&StrategyResult> {
        self.get(StrategyKind::None)
    }
}

/// Runs every configured strategy `repeat` times over `systems`.
pub fn run_benchmark(config: &BenchConfig, systems: &[LinearSystem]) -> Result<BenchOutcome, BenchError> {
    let first = systems
        .first()
        .ok_or_else(|| BenchError::Config("the sequence is empty".into()))?;
    let problem = ProblemInfo {
        steps: systems.len(),
        unknowns: first.matrix.nrows(),
        nnz: first.matrix.nnz(),
    };

    let run_one = |s: &StrategyConfig| run_sequence(systems, s, &config.amg, &config.solve).map_err(BenchError::Run);
    let mut results: Vec<StrategyResult> = Vec::with_capacity(config.strategies.len());
    for rep in 0..config.repeat {
        let round: Vec<Result<Run, BenchError>> = if config.parallel {
            thread::scope(|scope| {
                let handles: Vec<_> = config.strategies.iter().map(|s| scope.spawn(move || run_one(s))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(BenchError::Internal("strategy thread panicked".into()))))
                    .collect()
            })
        } else {
            config.strategies.iter().map(run_one).collect()
        };
        for (i, outcome) in round.into_iter().enumerate() {
            let (solutions, report) = outcome?;
            if rep == 0 {
                results.push(StrategyResult {
                    strategy: config.strategies[i],
                    runs: vec![report],
                    solutions,
                });
            } else {
                results[i].runs.push(report);
            }
        }
    }
    Ok(BenchOutcome { problem, results })
}

/// Loads the problem and runs the benchmark.
pub fn run(config: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    let systems = load_systems(config)?;
    run_benchmark(config, &systems)
}

/// One row of the strategy comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub kind: StrategyKind,
    pub setup_s: f64,
    pub solve_s: f64,
    pub rebuilds: usize,
    pub avg_iterations: f64,
    /// `None` for the baseline row.
    pub total_speedup: Option<f64>,
    pub setup_speedup: Option<f64>,
}

pub fn comparison_rows(outcome: &BenchOutcome) -> Vec<ComparisonRow> {
    let base = outcome.baseline();
    outcome
        .results
        .iter()
        .map(|r| {
            let speedups = match base {
                Some(b) if r.kind() != StrategyKind::None => Some((
                    speedup_percent(b.total().as_secs_f64(), r.total().as_secs_f64()),
                    speedup_percent(b.setup().as_secs_f64(), r.setup().as_secs_f64()),
                )),
                _ => None,
            };
            ComparisonRow {
                kind: r.kind(),
                setup_s: r.setup().as_secs_f64(),
                solve_s: r.solve().as_secs_f64(),
                rebuilds: r.first().full_rebuilds,
                avg_iterations: r.first().avg_iterations,
                total_speedup: speedups.map(|s| s.0),
                setup_speedup: speedups.map(|s| s.1),
            }
        })
        .collect()
}

/// Setup time split over the instrumented phases, in percent of their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShares {
    pub transfer_ops: f64,
    pub galerkin: f64,
    pub smoother: f64,
    pub coarse_solver: f64,
}

impl PhaseShares {
    pub const LABELS: [&'static str; 4] = [
        "Transfer operators",
        "Galerkin operator",
        "Smoother",
        "Direct solver for the coarsest system",
    ];

    pub fn values(&self) -> [f64; 4] {
        [self.transfer_ops, self.galerkin, self.smoother, self.coarse_solver]
    }
}

/// Phase shares of one strategy, from the median phase times over repetitions.
pub fn phase_shares(result: &StrategyResult) -> PhaseShares {
    let transfer = result.median(|r| r.phase_totals().transfer_ops).as_secs_f64();
    let galerkin = result.median(|r| r.phase_totals().galerkin).as_secs_f64();
    let smoother = result.median(|r| r.phase_totals().smoother).as_secs_f64();
    let coarse = result.median(|r| r.phase_totals().coarse_solver).as_secs_f64();
    let sum = transfer + galerkin + smoother + coarse;
    let pct = |x: f64| if sum > 0.0 { 100.0 * x / sum } else { 0.0 };
    PhaseShares {
        transfer_ops: pct(transfer),
        galerkin: pct(galerkin),
        smoother: pct(smoother),
        coarse_solver: pct(coarse),
    }
}
