use std::fs;
use std::path::PathBuf;

use amg_reuse::amg::AmgParams;
use amg_reuse::io::DiffusionSequenceSpec;
use amg_reuse::krylov::SolveParams;
use amg_reuse::reuse::{StrategyConfig, StrategyKind};
use clap::{Parser, ValueEnum};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Contrast 10, blob moving a quarter cell per step.
    Slow,
    /// Contrast 1000, blob moving two cells per step.
    Fast,
}

impl Preset {
    pub fn spec(self, grid_n: usize, steps: usize) -> DiffusionSequenceSpec {
        match self {
            Preset::Slow => DiffusionSequenceSpec::slow(grid_n, steps),
            Preset::Fast => DiffusionSequenceSpec::fast(grid_n, steps),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Slow => "slow",
            Preset::Fast => "fast",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
}

pub const DEFAULT_GRID: usize = 128;
pub const DEFAULT_STEPS: usize = 25;

/// Benchmark AMG setup reuse strategies on a sequence of linear systems.
#[derive(Debug, Clone, Default, Parser)]
#[command(name = "amg-bench", version)]
pub struct Cli {
    /// Generate a synthetic diffusion sequence from a preset.
    #[arg(long, value_enum, value_name = "PRESET", help_heading = "Problem")]
    pub generate: Option<Preset>,
    /// Read `step_NNNN.mtx` (and optional `step_NNNN.rhs.mtx`) from a directory.
    #[arg(long, value_name = "DIR", help_heading = "Problem")]
    pub sequence: Option<PathBuf>,
    /// Grid width of the generated problem [default: 128].
    #[arg(long, value_name = "N", help_heading = "Problem")]
    pub grid: Option<usize>,
    /// Number of generated steps [default: 25].
    #[arg(long, value_name = "N", help_heading = "Problem")]
    pub steps: Option<usize>,
    /// Coefficient ratio between blob center and background.
    #[arg(long, help_heading = "Problem")]
    pub contrast: Option<f64>,
    /// Blob displacement per step, in cells.
    #[arg(long, help_heading = "Problem")]
    pub path_speed: Option<f64>,
    /// Blob radius in cells [default: grid / 8].
    #[arg(long, help_heading = "Problem")]
    pub blob_sigma: Option<f64>,
    /// Seed of the generated right-hand side [default: 42].
    #[arg(long, help_heading = "Problem")]
    pub seed: Option<u64>,
    /// Write the generated sequence to a directory before benchmarking.
    #[arg(long, value_name = "DIR", help_heading = "Problem")]
    pub write_sequence: Option<PathBuf>,

    /// Comma-separated subset of none, full, partial [default: all].
    #[arg(long, value_name = "LIST", help_heading = "Strategies")]
    pub strategies: Option<String>,
    /// Full reuse: rebuild after a solve needing at least this many iterations [default: max-iter].
    #[arg(long, value_name = "N", help_heading = "Strategies")]
    pub reuse_iter_limit: Option<usize>,
    /// Partial reuse: full rebuild on every step divisible by N.
    #[arg(long, value_name = "N", help_heading = "Strategies")]
    pub rebuild_every: Option<usize>,

    /// Strength-of-connection threshold [default: 0.08].
    #[arg(long, help_heading = "AMG")]
    pub eps: Option<f64>,
    /// Jacobi damping [default: 0.72].
    #[arg(long, help_heading = "AMG")]
    pub omega: Option<f64>,
    /// Jacobi sweeps before coarse-grid correction [default: 1].
    #[arg(long, value_name = "N", help_heading = "AMG")]
    pub pre_sweeps: Option<usize>,
    /// Jacobi sweeps after coarse-grid correction [default: 1].
    #[arg(long, value_name = "N", help_heading = "AMG")]
    pub post_sweeps: Option<usize>,
    /// Stop coarsening at this many unknowns [default: 100].
    #[arg(long, value_name = "N", help_heading = "AMG")]
    pub coarse_enough: Option<usize>,
    /// Largest coarsest level the dense solver accepts [default: 2000].
    #[arg(long, value_name = "N", help_heading = "AMG")]
    pub max_direct_size: Option<usize>,

    /// Relative residual tolerance [default: 1e-8].
    #[arg(long, help_heading = "Solver")]
    pub tol: Option<f64>,
    /// BiCGStab iteration cap [default: 100].
    #[arg(long, value_name = "N", help_heading = "Solver")]
    pub max_iter: Option<usize>,

    #[arg(long, value_enum, help_heading = "Output")]
    pub format: Option<OutputFormat>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH", help_heading = "Output")]
    pub output: Option<PathBuf>,
    /// Write per-step metrics as CSV.
    #[arg(long, value_name = "PATH", help_heading = "Output")]
    pub steps_csv: Option<PathBuf>,

    /// Run the whole benchmark N times and report median timings.
    #[arg(long, value_name = "N", help_heading = "Execution")]
    pub repeat: Option<usize>,
    /// Run strategies concurrently (timings become contended).
    #[arg(long, help_heading = "Execution")]
    pub parallel_strategies: bool,
    /// `key = value` file; its settings override command-line flags.
    #[arg(long, value_name = "FILE", help_heading = "Execution")]
    pub config: Option<PathBuf>,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("invalid value '{value}' for '{key}': {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("invalid value '{value}' for '{key}': expected true or false")),
    }
}

impl Cli {
    /// Applies one `key = value` setting. Keys are the long flag names,
    /// with `_` accepted in place of `-`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let k = key.as_str();
        match k {
            "generate" => {
                self.generate = Some(Preset::from_str(value, true).map_err(|e| format!("invalid value for 'generate': {e}"))?);
                self.sequence = None;
            }
            "sequence" => {
                self.sequence = Some(PathBuf::from(value));
                self.generate = None;
            }
            "grid" => self.grid = Some(parse(k, value)?),
            "steps" => self.steps = Some(parse(k, value)?),
            "contrast" => self.contrast = Some(parse(k, value)?),
            "path-speed" => self.path_speed = Some(parse(k, value)?),
            "blob-sigma" => self.blob_sigma = Some(parse(k, value)?),
            "seed" => self.seed = Some(parse(k, value)?),
            "write-sequence" => self.write_sequence = Some(PathBuf::from(value)),
            "strategies" => self.strategies = Some(value.to_string()),
            "reuse-iter-limit" => self.reuse_iter_limit = Some(parse(k, value)?),
            "rebuild-every" => self.rebuild_every = Some(parse(k, value)?),
            "eps" => self.eps = Some(parse(k, value)?),
            "omega" => self.omega = Some(parse(k, value)?),
            "pre-sweeps" => self.pre_sweeps = Some(parse(k, value)?),
            "post-sweeps" => self.post_sweeps = Some(parse(k, value)?),
            "coarse-enough" => self.coarse_enough = Some(parse(k, value)?),
            "max-direct-size" => self.max_direct_size = Some(parse(k, value)?),
            "tol" => self.tol = Some(parse(k, value)?),
            "max-iter" => self.max_iter = Some(parse(k, value)?),
            "format" => {
                self.format = Some(OutputFormat::from_str(value, true).map_err(|e| format!("invalid value for 'format': {e}"))?)
            }
            "output" => self.output = Some(PathBuf::from(value)),
            "steps-csv" => self.steps_csv = Some(PathBuf::from(value)),
            "repeat" => self.repeat = Some(parse(k, value)?),
            "parallel-strategies" => self.parallel_strategies = parse_bool(k, value)?,
            "config" => return Err("'config' cannot be set from a config file".into()),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Applies every setting of a config file. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_config_text(&mut self, text: &str) -> Result<(), String> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", i + 1))?;
            self.set(key, value).map_err(|e| format!("line {}: {e}", i + 1))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Generated { preset: Preset, spec: DiffusionSequenceSpec },
    Directory(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub path: PathBuf,
    pub text: String,
}

/// A validated benchmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub source: Source,
    /// One entry per strategy in run order; the baseline comes first.
    pub strategies: Vec<StrategyConfig>,
    /// The baseline was not requested but is needed for speedups.
    pub baseline_added: bool,
    pub amg: AmgParams,
    pub solve: SolveParams,
    pub format: OutputFormat,
    pub output: Option<PathBuf>,
    pub steps_csv: Option<PathBuf>,
    pub write_sequence: Option<PathBuf>,
    pub repeat: usize,
    pub parallel: bool,
    pub config_file: Option<ConfigFile>,
}

impl BenchConfig {
    /// A generated-problem configuration with default parameters.
    pub fn generated(preset: Preset, grid_n: usize, steps: usize) -> Self {
        let solve = SolveParams::default();
        BenchConfig {
            source: Source::Generated {
                preset,
                spec: preset.spec(grid_n, steps),
            },
            strategies: StrategyKind::ALL.iter().map(|&k| StrategyConfig::new(k, &solve)).collect(),
            baseline_added: false,
            amg: AmgParams::default(),
            solve,
            format: OutputFormat::Markdown,
            output: None,
            steps_csv: None,
            write_sequence: None,
            repeat: 1,
            parallel: false,
            config_file: None,
        }
    }

    /// Reads the config file named by `--config`, if any, and validates.
    pub fn from_cli(mut cli: Cli) -> Result<Self, BenchError> {
        let config_file = match cli.config.take() {
            Some(path) => {
                let text = fs::read_to_string(&path).map_err(|source| BenchError::Io {
                    path: path.clone(),
                    source,
                })?;
                cli.apply_config_text(&text)
                    .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
                Some(ConfigFile { path, text })
            }
            None => None,
        };
        let mut config = Self::from_settings(&cli)?;
        config.config_file = config_file;
        Ok(config)
    }

    fn from_settings(cli: &Cli) -> Result<Self, BenchError> {
        let invalid = |e: amg_reuse::Error| BenchError::Config(e.to_string());

        let source = match (cli.generate, &cli.sequence) {
            (Some(_), Some(_)) => return Err(BenchError::Config("--generate and --sequence are mutually exclusive".into())),
            (None, None) => return Err(BenchError::Config("no problem given: use --generate slow|fast or --sequence DIR".into())),
            (Some(preset), None) => {
                let grid_n = cli.grid.unwrap_or(DEFAULT_GRID);
                let mut spec = preset.spec(grid_n, cli.steps.unwrap_or(DEFAULT_STEPS));
                if let Some(c) = cli.contrast {
                    spec.contrast = c;
                }
                if let Some(s) = cli.path_speed {
                    spec.path_speed = s;
                }
                if let Some(s) = cli.blob_sigma {
                    spec.blob_sigma = s;
                }
                if let Some(s) = cli.seed {
                    spec.seed = s;
                }
                spec.validate().map_err(invalid)?;
                Source::Generated { preset, spec }
            }
            (None, Some(dir)) => {
                let generator_flags = [
                    ("grid", cli.grid.is_some()),
                    ("steps", cli.steps.is_some()),
                    ("contrast", cli.contrast.is_some()),
                    ("path-speed", cli.path_speed.is_some()),
                    ("blob-sigma", cli.blob_sigma.is_some()),
                    ("seed", cli.seed.is_some()),
                    ("write-sequence", cli.write_sequence.is_some()),
                ];
                if let Some((name, _)) = generator_flags.iter().find(|(_, set)| *set) {
                    return Err(BenchError::Config(format!("--{name} only applies to --generate")));
                }
                Source::Directory(dir.clone())
            }
        };

        let mut kinds = match &cli.strategies {
            Some(list) => list
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| s.parse::<StrategyKind>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(invalid)?,
            None => StrategyKind::ALL.to_vec(),
        };
        kinds.sort();
        kinds.dedup();
        if kinds.is_empty() {
            return Err(BenchError::Config("--strategies must name at least one strategy".into()));
        }
        let baseline_added = kinds[0] != StrategyKind::None;
        if baseline_added {
            kinds.insert(0, StrategyKind::None);
        }

        let defaults = AmgParams::default();
        let amg = AmgParams {
            eps_strong: cli.eps.unwrap_or(defaults.eps_strong),
            omega: cli.omega.unwrap_or(defaults.omega),
            pre_sweeps: cli.pre_sweeps.unwrap_or(defaults.pre_sweeps),
            post_sweeps: cli.post_sweeps.unwrap_or(defaults.post_sweeps),
            coarse_enough: cli.coarse_enough.unwrap_or(defaults.coarse_enough),
            max_direct_size: cli.max_direct_size.unwrap_or(defaults.max_direct_size),
        };
        amg.validate().map_err(invalid)?;

        let defaults = SolveParams::default();
        let solve = SolveParams {
            tol: cli.tol.unwrap_or(defaults.tol),
            max_iter: cli.max_iter.unwrap_or(defaults.max_iter),
        };
        solve.validate().map_err(invalid)?;

        let strategies = kinds
            .into_iter()
            .map(|kind| {
                let mut s = StrategyConfig::new(kind, &solve);
                if let Some(limit) = cli.reuse_iter_limit {
                    s.reuse_iter_limit = limit;
                }
                s.rebuild_every = cli.rebuild_every;
                s.validate(&solve).map(|_| s)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(invalid)?;

        let repeat = cli.repeat.unwrap_or(1);
        if repeat == 0 {
            return Err(BenchError::Config("--repeat must be at least 1".into()));
        }

        Ok(BenchConfig {
            source,
            strategies,
            baseline_added,
            amg,
            solve,
            format: cli.format.unwrap_or_default(),
            output: cli.output.clone(),
            steps_csv: cli.steps_csv.clone(),
            write_sequence: cli.write_sequence.clone(),
            repeat,
            parallel: cli.parallel_strategies,
            config_file: None,
        })
    }

    pub fn kinds(&self) -> Vec<StrategyKind> {
        self.strategies.iter().map(|s| s.kind).collect()
    }

    /// Speedup columns need at least one strategy besides the baseline.
    pub fn has_speedups(&self) -> bool {
        self.strategies.len() > 1
    }
}
