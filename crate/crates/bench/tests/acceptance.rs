//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits with a failure status if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use amg_reuse::amg::{AmgParams, Hierarchy, JacobiSmoother, SetupPhaseTimings};
use amg_reuse::gallery::{poisson_1d, poisson_2d};
use amg_reuse::io::{read_matrix, write_matrix, MmStorage};
use amg_reuse::krylov::{bicgstab, SolveParams};
use amg_reuse::reuse::{speedup, RunReport, SpeedupKind, StepAction, StepMetrics, StrategyConfig, StrategyKind};
use amg_reuse::sparse::{galerkin_product, CsrMatrix, SparseStructure};
use amg_reuse_bench::{phase_shares, run, BenchConfig, BenchOutcome, Preset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    passed: bool,
    detail: String,
}

impl Check {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Check {
            passed,
            detail: detail.into(),
        }
    }
}

fn random_sparse(rng: &mut ChaCha8Rng, nrows: usize, ncols: usize, fill: f64) -> CsrMatrix {
    let mut t = Vec::new();
    for i in 0..nrows {
        for j in 0..ncols {
            if rng.gen_bool(fill) {
                t.push((i, j, rng.gen_range(-1.0..1.0)));
            }
        }
    }
    CsrMatrix::from_triplets(nrows, ncols, &t).unwrap()
}

fn dense_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            let mut out = vec![0.0; m];
            for (k, &x) in row.iter().enumerate() {
                if x != 0.0 {
                    for (o, &y) in out.iter_mut().zip(&b[k]) {
                        *o += x * y;
                    }
                }
            }
            out
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on a dense copy.
fn dense_solve(a: &CsrMatrix, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut m = a.to_dense();
    let mut b = f.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs())).unwrap();
        m.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let l = m[i][k] / m[k][k];
            if l != 0.0 {
                for j in k..n {
                    m[i][j] -= l * m[k][j];
                }
                b[i] -= l * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    x
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn report_from_totals(kind: StrategyKind, setup: f64, solve: f64, steps: usize) -> RunReport {
    let metrics = (0..steps)
        .map(|k| StepMetrics {
            step: k,
            action: StepAction::FullBuild,
            setup_time: if k == 0 { Duration::from_secs_f64(setup) } else { Duration::ZERO },
            solve_time: if k == 0 { Duration::from_secs_f64(solve) } else { Duration::ZERO },
            phase_timings: SetupPhaseTimings::default(),
            iterations: 1,
            converged: true,
            breakdown: false,
            relative_residual: 0.0,
        })
        .collect();
    RunReport::from_steps(StrategyConfig::new(kind, &SolveParams::default()), metrics)
}

fn speedup_arithmetic() -> Check {
    // (setup, solve) for none, full, partial; then expected total and setup speedups.
    let blocks: [(&str, [(f64, f64); 3], [f64; 4]); 4] = [
        ("level set OpenMP", [(1.235, 2.893), (0.021, 3.132), (0.423, 2.794)], [31.0, 5781.0, 28.0, 192.0]),
        ("level set CUDA", [(2.064, 0.944), (0.037, 0.904), (0.949, 0.775)], [220.0, 5478.0, 75.0, 117.0]),
        ("Navier-Stokes OpenMP", [(3.756, 70.564), (1.960, 194.310), (2.198, 71.349)], [-62.0, 92.0, 1.0, 71.0]),
        ("Navier-Stokes CUDA", [(9.766, 21.429), (4.926, 59.175), (7.049, 21.603)], [-51.0, 98.0, 9.0, 39.0]),
    ];
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (name, times, expected) in blocks {
        let [none, full, partial] = [StrategyKind::None, StrategyKind::Full, StrategyKind::Partial]
            .map(|k| report_from_totals(k, times[k as usize].0, times[k as usize].1, 49));
        let got = [
            speedup(&none, &full, SpeedupKind::Total).unwrap(),
            speedup(&none, &full, SpeedupKind::Setup).unwrap(),
            speedup(&none, &partial, SpeedupKind::Total).unwrap(),
            speedup(&none, &partial, SpeedupKind::Setup).unwrap(),
        ];
        for (g, e) in got.iter().zip(expected) {
            let d = (g - e).abs();
            worst = worst.max(d);
            if d > 1.0 {
                failures.push(format!("{name}: {g:.2} vs {e}"));
            }
        }
    }
    Check::new(
        failures.is_empty(),
        format!("12 speedups, worst deviation {worst:.3} points {}", failures.join("; ")),
    )
}

fn hierarchy_fixed_point() -> Check {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, a, params) in [
        ("1D n=64", poisson_1d(64), AmgParams { coarse_enough: 8, ..AmgParams::default() }),
        ("2D 64x64", poisson_2d(64), AmgParams::default()),
    ] {
        let a = Arc::new(a);
        let h = Hierarchy::setup(Arc::clone(&a), &params).unwrap();
        let u = h.partial_update(Arc::clone(&a), &params).unwrap();
        let bits_equal = h.levels().iter().zip(u.levels()).all(|(x, y)| {
            let m = |l: &amg_reuse::amg::Level| l.matrix().values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            x.matrix().pattern() == y.matrix().pattern() && m(x) == m(y)
        });
        let same = h.num_levels() > 1 && h.numerically_identical(&u) && bits_equal;
        ok &= same;
        details.push(format!("{name}: {} levels, identical {same}", h.num_levels()));
    }
    Check::new(ok, details.join(", "))
}

fn galerkin_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..25 {
        let n = rng.gen_range(2..=200);
        let m = rng.gen_range(1..=n);
        let fill = rng.gen_range(0.01..=0.15);
        let a = random_sparse(&mut rng, n, n, fill);
        let p = random_sparse(&mut rng, n, m, fill);
        let r = random_sparse(&mut rng, m, n, fill);
        let c = galerkin_product(&r, &a, &p).unwrap();
        let oracle = dense_mul(&dense_mul(&r.to_dense(), &a.to_dense()), &p.to_dense());
        let dense = c.to_dense();
        let diff: f64 = dense
            .iter()
            .flatten()
            .zip(oracle.iter().flatten())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = oracle.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    Check::new(worst <= 1e-12, format!("25 triples, worst relative Frobenius error {worst:.2e}"))
}

fn solver_correctness() -> Check {
    let a = poisson_2d(16);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f: Vec<f64> = (0..a.nrows()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let h = Hierarchy::setup(a.clone(), &AmgParams::default()).unwrap();
    let (u, stats) = bicgstab(&a, &h, &f, &vec![0.0; f.len()], &SolveParams::default()).unwrap();
    let exact = dense_solve(&a, &f);
    let err: Vec<f64> = u.iter().zip(&exact).map(|(x, y)| x - y).collect();
    let rel = max_abs(&err) / max_abs(&exact);
    Check::new(
        stats.converged && rel <= 1e-6,
        format!(
            "{} levels, {} iterations, relative max-norm error {rel:.2e}",
            h.num_levels(),
            stats.iterations
        ),
    )
}

fn partial_preserves_convergence(slow: &BenchOutcome) -> Check {
    let none = slow.get(StrategyKind::None).unwrap().first();
    let partial = slow.get(StrategyKind::Partial).unwrap().first();
    let ratio = partial.avg_iterations / none.avg_iterations;
    let worst = none
        .iterations()
        .iter()
        .zip(partial.iterations())
        .map(|(&b, p)| p as i64 - b as i64)
        .max()
        .unwrap();
    Check::new(
        ratio <= 1.15 && worst <= 3,
        format!(
            "avg iterations {:.2} vs {:.2} (ratio {ratio:.3}), worst per-step excess {worst}",
            partial.avg_iterations, none.avg_iterations
        ),
    )
}

fn partial_cuts_setup(slow: &BenchOutcome) -> Check {
    let none = slow.get(StrategyKind::None).unwrap();
    let partial = slow.get(StrategyKind::Partial).unwrap().first();
    let full_builds: Vec<&StepMetrics> = none.first().steps.iter().filter(|s| s.action == StepAction::FullBuild).collect();
    let full_mean = full_builds.iter().map(|s| s.setup_time.as_secs_f64()).sum::<f64>() / full_builds.len() as f64;
    let partial_mean = partial.total_setup.as_secs_f64() / partial.steps.len() as f64;
    let ratio = partial_mean / full_mean;
    let transfer = phase_shares(none).transfer_ops;
    Check::new(
        ratio <= 0.70 && (20.0..=70.0).contains(&transfer),
        format!(
            "mean setup {:.2} ms vs {:.2} ms (ratio {ratio:.3}), transfer share {transfer:.1}%",
            partial_mean * 1e3,
            full_mean * 1e3
        ),
    )
}

fn full_reuse_regimes(slow: &BenchOutcome, fast: &BenchOutcome) -> Check {
    let avg = |o: &BenchOutcome, k| o.get(k).unwrap().first().avg_iterations;
    let slow_full = slow.get(StrategyKind::Full).unwrap().first();
    let slow_ratio = avg(slow, StrategyKind::Full) / avg(slow, StrategyKind::None);
    let fast_full = fast.get(StrategyKind::Full).unwrap().first();
    let fast_ratio = avg(fast, StrategyKind::Full) / avg(fast, StrategyKind::None);
    let steps = fast_full.steps.len();
    let slow_ok = slow_full.full_rebuilds <= 3 && slow_ratio <= 1.3;
    let fast_ok = fast_ratio >= 1.5 || fast_full.full_rebuilds as f64 >= steps as f64 / 3.0;
    Check::new(
        slow_ok && fast_ok,
        format!(
            "slow: {} rebuilds, iteration ratio {slow_ratio:.3}; fast: {} rebuilds of {steps} steps, iteration ratio {fast_ratio:.3}",
            slow_full.full_rebuilds, fast_full.full_rebuilds
        ),
    )
}

fn vcycle_and_smoother() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let a = poisson_2d(32);
    let params = AmgParams { coarse_enough: 20, ..AmgParams::default() };
    let h = Hierarchy::setup(a.clone(), &params).unwrap();
    let n = a.nrows();
    let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let g: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (alpha, beta) = (2.5, -0.75);
    let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| alpha * x + beta * y).collect();
    let lhs = h.vcycle(&combo).unwrap();
    let (vf, vg) = (h.vcycle(&f).unwrap(), h.vcycle(&g).unwrap());
    let rhs: Vec<f64> = vf.iter().zip(&vg).map(|(x, y)| alpha * x + beta * y).collect();
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(x, y)| x - y).collect();
    let linearity = norm(&diff) / norm(&rhs);

    let t = poisson_1d(50);
    let smoother = JacobiSmoother::new(&t, 0.72).unwrap();
    let f1: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut u = vec![0.0; 50];
    let residual = |u: &[f64]| {
        let au = t.spmv(u).unwrap();
        norm(&au.iter().zip(&f1).map(|(x, y)| y - x).collect::<Vec<_>>())
    };
    let mut prev = residual(&u);
    let mut monotone = true;
    for _ in 0..30 {
        smoother.smooth(&t, &f1, &mut u, 1).unwrap();
        let r = residual(&u);
        monotone &= r < prev;
        prev = r;
    }

    let small = poisson_2d(8);
    let hs = Hierarchy::setup(small.clone(), &AmgParams::default()).unwrap();
    let fs: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let us = hs.vcycle(&fs).unwrap();
    let exact = dense_solve(&small, &fs);
    let err: Vec<f64> = us.iter().zip(&exact).map(|(x, y)| x - y).collect();
    let single = max_abs(&err) / max_abs(&exact);

    Check::new(
        h.num_levels() > 2 && linearity <= 1e-12 && monotone && hs.num_levels() == 1 && single <= 1e-12,
        format!(
            "linearity {linearity:.2e} over {} levels, Jacobi monotone {monotone}, single-level error {single:.2e}",
            h.num_levels()
        ),
    )
}

fn matrix_market_round_trip() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut mismatches = 0;
    let mut symmetric_cases = 0;
    for i in 0..20 {
        let nrows = rng.gen_range(1..=60);
        let ncols = if i % 4 == 0 { nrows } else { rng.gen_range(1..=60) };
        let fill = rng.gen_range(0.02..0.3);
        let mut a = random_sparse(&mut rng, nrows, ncols, fill);
        let scale = 10f64.powi(rng.gen_range(-30..30));
        a = a.scaled(scale);
        let storage = if i % 4 == 0 {
            a = CsrMatrix::from_triplets(
                nrows,
                nrows,
                &a.triplets().chain(a.transpose().triplets()).collect::<Vec<_>>(),
            )
            .unwrap();
            symmetric_cases += 1;
            MmStorage::Symmetric
        } else {
            MmStorage::General
        };
        let path = dir.path().join(format!("m{i}.mtx"));
        write_matrix(&path, &a, storage, &[]).unwrap();
        let b = read_matrix(&path).unwrap();
        let bits = |m: &CsrMatrix| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        if a.pattern() != b.pattern() || bits(&a) != bits(&b) || (a.nrows(), a.ncols()) != (b.nrows(), b.ncols()) {
            mismatches += 1;
        }
    }
    Check::new(
        mismatches == 0 && symmetric_cases > 0,
        format!("20 matrices ({symmetric_cases} symmetric storage), {mismatches} mismatches"),
    )
}

fn determinism(first: &BenchOutcome, second: &BenchOutcome) -> Check {
    let mut same = first.results.len() == second.results.len();
    for (x, y) in first.results.iter().zip(&second.results) {
        let (rx, ry) = (x.first(), y.first());
        same &= rx.iterations() == ry.iterations()
            && rx.full_rebuilds == ry.full_rebuilds
            && rx.steps.iter().map(|s| s.action).eq(ry.steps.iter().map(|s| s.action))
            && x.solutions.len() == y.solutions.len()
            && x.solutions.iter().zip(&y.solutions).all(|(u, v)| {
                u.iter().map(|a| a.to_bits()).eq(v.iter().map(|b| b.to_bits()))
            });
    }
    Check::new(same, format!("{} strategies compared, identical {same}", first.results.len()))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, budget: f64, elapsed: Duration, check: Check| {
        let secs = elapsed.as_secs_f64();
        let in_budget = secs < budget;
        let pass = check.passed && in_budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} | {name} | {secs:.2}s of {budget}s | {}",
            if pass { "PASS" } else { "FAIL" },
            check.detail.trim()
        );
    };

    let t = Instant::now();
    let c = speedup_arithmetic();
    report(1, "speedup arithmetic", 1.0, t.elapsed(), c);

    let t = Instant::now();
    let c = hierarchy_fixed_point();
    report(2, "hierarchy fixed point", 1.0, t.elapsed(), c);

    let t = Instant::now();
    let c = galerkin_oracle();
    report(3, "Galerkin oracle", 5.0, t.elapsed(), c);

    let t = Instant::now();
    let c = solver_correctness();
    report(4, "solver correctness", 1.0, t.elapsed(), c);

    let t = Instant::now();
    let slow = run(&BenchConfig::generated(Preset::Slow, 128, 25)).expect("slow benchmark runs");
    let slow_time = t.elapsed();
    report(5, "partial reuse preserves convergence", 60.0, slow_time, partial_preserves_convergence(&slow));
    report(6, "partial reuse cuts setup cost", 60.0, slow_time, partial_cuts_setup(&slow));

    let t = Instant::now();
    let mut fast_config = BenchConfig::generated(Preset::Fast, 128, 25);
    fast_config.strategies.retain(|s| s.kind != StrategyKind::Partial);
    let fast = run(&fast_config).expect("fast benchmark runs");
    report(7, "full reuse is regime dependent", 120.0, slow_time + t.elapsed(), full_reuse_regimes(&slow, &fast));

    let t = Instant::now();
    let c = vcycle_and_smoother();
    report(8, "V-cycle and smoother properties", 1.0, t.elapsed(), c);

    let t = Instant::now();
    let c = matrix_market_round_trip();
    report(9, "Matrix Market round trip", 1.0, t.elapsed(), c);

    let t = Instant::now();
    let again = run(&BenchConfig::generated(Preset::Slow, 128, 25)).expect("slow benchmark runs");
    report(10, "determinism", 120.0, slow_time + t.elapsed(), determinism(&slow, &again));

    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
