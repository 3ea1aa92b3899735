use std::fmt::Write as _;
use std::io;

use amg_reuse::reuse::{StepAction, StepMetrics, StrategyKind};

use crate::config::{BenchConfig, OutputFormat, Source};
use crate::runner::{comparison_rows, phase_shares, BenchOutcome, PhaseShares};

/// Description of the run, one line per item.
pub fn header_lines(config: &BenchConfig, outcome: &BenchOutcome) -> Vec<String> {
    let p = &outcome.problem;
    let mut lines = Vec::new();
    match &config.source {
        Source::Generated { preset, spec } => lines.push(format!(
            "Problem: generated {} sequence, grid {}x{} ({} unknowns, {} nonzeros), {} steps, contrast {}, path speed {}, blob sigma {}, seed {}",
            preset.name(),
            spec.grid_n,
            spec.grid_n,
            p.unknowns,
            p.nnz,
            p.steps,
            spec.contrast,
            spec.path_speed,
            spec.blob_sigma,
            spec.seed
        )),
        Source::Directory(dir) => lines.push(format!(
            "Problem: sequence {} ({} steps, {} unknowns, {} nonzeros in step 0)",
            dir.display(),
            p.steps,
            p.unknowns,
            p.nnz
        )),
    }
    let a = &config.amg;
    lines.push(format!(
        "AMG: eps {}, omega {}, sweeps {}/{}, coarse enough {}, max direct size {}",
        a.eps_strong, a.omega, a.pre_sweeps, a.post_sweeps, a.coarse_enough, a.max_direct_size
    ));
    lines.push(format!("Solver: BiCGStab, tol {:e}, max iterations {}", config.solve.tol, config.solve.max_iter));
    if let Some(s) = config.strategies.first() {
        let rebuild = s.rebuild_every.map_or_else(|| "never".to_string(), |m| format!("every {m} steps"));
        lines.push(format!(
            "Reuse: iteration limit {}, partial rebuild {}",
            s.reuse_iter_limit, rebuild
        ));
    }
    if config.baseline_added {
        lines.push("Baseline 'none' added for speedups".into());
    }
    lines.push(if config.repeat > 1 {
        format!("Timings: median of {} runs", config.repeat)
    } else {
        "Timings: single run".into()
    });
    if config.parallel {
        lines.push("Timings are contended: strategies ran in parallel".into());
    }
    for r in &outcome.results {
        let failed = r.first().steps.iter().filter(|s| !s.converged).count();
        if failed > 0 {
            lines.push(format!(
                "Warning: {} did not converge on {} of {} steps",
                r.kind().label(),
                failed,
                p.steps
            ));
        }
    }
    if let Some(file) = &config.config_file {
        lines.push(format!("Config file: {}", file.path.display()));
        lines.extend(
            file.text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| format!("    {l}")),
        );
    }
    lines
}

fn percent(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_infinite() => "inf".into(),
        Some(v) => format!("{v:.0}"),
        None => String::new(),
    }
}

/// Strategy comparison table as rows of cells, header first.
pub fn comparison_table(outcome: &BenchOutcome, with_speedups: bool) -> Vec<Vec<String>> {
    let mut header: Vec<String> = ["Strategy", "Setup (s)", "Solve (s)", "Rebuilds", "Average iterations"]
        .map(String::from)
        .to_vec();
    if with_speedups {
        header.push("Total speedup (%)".into());
        header.push("Setup speedup (%)".into());
    }
    let mut table = vec![header];
    for row in comparison_rows(outcome) {
        let mut cells = vec![
            row.kind.label().to_string(),
            format!("{:.3}", row.setup_s),
            format!("{:.3}", row.solve_s),
            row.rebuilds.to_string(),
            format!("{:.2}", row.avg_iterations),
        ];
        if with_speedups {
            cells.push(percent(row.total_speedup));
            cells.push(percent(row.setup_speedup));
        }
        table.push(cells);
    }
    table
}

/// Setup phase breakdown, one column per strategy, header first.
pub fn breakdown_table(outcome: &BenchOutcome) -> Vec<Vec<String>> {
    let shares: Vec<PhaseShares> = outcome.results.iter().map(phase_shares).collect();
    let mut header = vec!["Phase".to_string()];
    header.extend(outcome.results.iter().map(|r| format!("{} (%)", r.kind().label())));
    let mut table = vec![header];
    for (i, label) in PhaseShares::LABELS.iter().enumerate() {
        let mut row = vec![label.to_string()];
        row.extend(shares.iter().map(|s| format!("{:.0}", s.values()[i])));
        table.push(row);
    }
    table
}

fn markdown_table(out: &mut String, table: &[Vec<String>]) {
    for (i, row) in table.iter().enumerate() {
        let _ = writeln!(out, "| {} |", row.join(" | "));
        if i == 0 {
            let seps: Vec<&str> = row.iter().enumerate().map(|(j, _)| if j == 0 { ":--" } else { "--:" }).collect();
            let _ = writeln!(out, "| {} |", seps.join(" | "));
        }
    }
}

fn csv_table(table: &[Vec<String>]) -> io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in table {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
}

/// The full report: header, comparison table and breakdown table.
///
/// In CSV form the header lines start with `#` and the two tables are
/// separated by a blank line.
pub fn render_report(config: &BenchConfig, outcome: &BenchOutcome) -> io::Result<String> {
    let header = header_lines(config, outcome);
    let comparison = comparison_table(outcome, config.has_speedups());
    let breakdown = breakdown_table(outcome);
    let mut out = String::new();
    match config.format {
        OutputFormat::Markdown => {
            out.push_str("# AMG setup reuse benchmark\n\n");
            for line in &header {
                if let Some(rest) = line.strip_prefix("    ") {
                    let _ = writeln!(out, "  - `{rest}`");
                } else {
                    let _ = writeln!(out, "- {line}");
                }
            }
            out.push_str("\n## Strategy comparison\n\n");
            markdown_table(&mut out, &comparison);
            out.push_str("\n## Setup phase breakdown\n\n");
            markdown_table(&mut out, &breakdown);
        }
        OutputFormat::Csv => {
            for line in &header {
                let _ = writeln!(out, "# {}", line.trim_start());
            }
            out.push_str(&csv_table(&comparison)?);
            out.push('\n');
            out.push_str(&csv_table(&breakdown)?);
        }
    }
    Ok(out)
}

/// Column names of the per-step CSV.
pub const STEP_COLUMNS: [&str; 13] = [
    "strategy",
    "step",
    "action",
    "setup_s",
    "solve_s",
    "transfer_ops_s",
    "galerkin_s",
    "smoother_s",
    "coarse_solver_s",
    "iterations",
    "converged",
    "breakdown",
    "relative_residual",
];

/// One line of the per-step CSV. Times are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub strategy: StrategyKind,
    pub step: usize,
    pub action: StepAction,
    pub setup_s: f64,
    pub solve_s: f64,
    pub transfer_ops_s: f64,
    pub galerkin_s: f64,
    pub smoother_s: f64,
    pub coarse_solver_s: f64,
    pub iterations: usize,
    pub converged: bool,
    pub breakdown: bool,
    pub relative_residual: f64,
}

impl StepRecord {
    pub fn new(strategy: StrategyKind, m: &StepMetrics) -> Self {
        StepRecord {
            strategy,
            step: m.step,
            action: m.action,
            setup_s: m.setup_time.as_secs_f64(),
            solve_s: m.solve_time.as_secs_f64(),
            transfer_ops_s: m.phase_timings.transfer_ops.as_secs_f64(),
            galerkin_s: m.phase_timings.galerkin.as_secs_f64(),
            smoother_s: m.phase_timings.smoother.as_secs_f64(),
            coarse_solver_s: m.phase_timings.coarse_solver.as_secs_f64(),
            iterations: m.iterations,
            converged: m.converged,
            breakdown: m.breakdown,
            relative_residual: m.relative_residual,
        }
    }

    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.strategy.name().to_string(),
            self.step.to_string(),
            self.action.name().to_string(),
            self.setup_s.to_string(),
            self.solve_s.to_string(),
            self.transfer_ops_s.to_string(),
            self.galerkin_s.to_string(),
            self.smoother_s.to_string(),
            self.coarse_solver_s.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            self.breakdown.to_string(),
            self.relative_residual.to_string(),
        ]
    }

    pub fn from_record(record: &csv::StringRecord) -> Result<Self, String> {
        if record.len() != STEP_COLUMNS.len() {
            return Err(format!("expected {} fields, found {}", STEP_COLUMNS.len(), record.len()));
        }
        fn field<T: std::str::FromStr>(record: &csv::StringRecord, i: usize) -> Result<T, String> {
            record[i]
                .parse()
                .map_err(|_| format!("bad {} '{}'", STEP_COLUMNS[i], &record[i]))
        }
        let action = match &record[2] {
            "full_build" => StepAction::FullBuild,
            "partial_update" => StepAction::PartialUpdate,
            "reused_unchanged" => StepAction::ReusedUnchanged,
            other => return Err(format!("bad action '{other}'")),
        };
        Ok(StepRecord {
            strategy: record[0].parse().map_err(|e| format!("{e}"))?,
            step: field(record, 1)?,
            action,
            setup_s: field(record, 3)?,
            solve_s: field(record, 4)?,
            transfer_ops_s: field(record, 5)?,
            galerkin_s: field(record, 6)?,
            smoother_s: field(record, 7)?,
            coarse_solver_s: field(record, 8)?,
            iterations: field(record, 9)?,
            converged: field(record, 10)?,
            breakdown: field(record, 11)?,
            relative_residual: field(record, 12)?,
        })
    }
}

/// Records of the first repetition, strategy by strategy.
pub fn step_records(outcome: &BenchOutcome) -> Vec<StepRecord> {
    outcome
        .results
        .iter()
        .flat_map(|r| r.first().steps.iter().map(move |m| StepRecord::new(r.kind(), m)))
        .collect()
}

pub fn write_steps_csv<W: io::Write>(writer: W, outcome: &BenchOutcome) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(STEP_COLUMNS)?;
    for rec in step_records(outcome) {
        w.write_record(rec.to_record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_steps_csv<R: io::Read>(reader: R) -> Result<Vec<StepRecord>, String> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers().map_err(|e| e.to_string())?;
    if headers.iter().ne(STEP_COLUMNS) {
        return Err(format!("unexpected header {headers:?}"));
    }
    r.records()
        .map(|rec| rec.map_err(|e| e.to_string()).and_then(|rec| StepRecord::from_record(&rec)))
        .collect()
}
