//! Acceptance suite. Prints one PASS/FAIL line per criterion, with the
//! individual measurements indented below it, and exits non-zero if any
//! criterion fails. Pass criterion numbers as arguments to run a subset,
//! e.g. `cargo test --test acceptance -- 1 4`.

use std::time::Instant;

use mgrit_advect::fourier::rho_estimate;
use mgrit_advect::{InterpDegree, OperatorKind, WaveSpeedId};
use mgrit_advect_cli::config::ExperimentConfig;
use mgrit_advect_cli::lfa;
use mgrit_advect_cli::run::execute;
use mgrit_advect_cli::table::{cells, run_cell, Cell, CellFilter, TableId};
use mgrit_advect_cli::verify::{run_suite, Suite};

struct Outcome {
    passed: bool,
    title: &'static str,
    lines: Vec<String>,
}

fn find_cell(table: TableId, speed: &str, p: usize, m: usize, operator: OperatorKind) -> Cell {
    let (n_x, n_t) = table.meshes()[0];
    let id: WaveSpeedId = speed.parse().expect("speed id");
    cells(table, &CellFilter::default())
        .into_iter()
        .find(|c| {
            c.speed == id.name()
                && c.p == p
                && c.m == m
                && c.n_x == n_x
                && c.n_t == n_t
                && c.operator == operator.name()
        })
        .expect("cell in table")
}

/// Runs each `(speed, p, m, expected)` cell and checks `|iters - expected| <= tol`.
fn count_cells(
    table: TableId,
    operator: OperatorKind,
    targets: &[(&str, usize, usize, usize)],
    tol: usize,
    lines: &mut Vec<String>,
    counts: &mut Vec<usize>,
) -> bool {
    let mut ok = true;
    for &(speed, p, m, want) in targets {
        let cell = find_cell(table, speed, p, m, operator);
        let start = Instant::now();
        let row = run_cell(&cell, 0).expect("cell runs");
        let good = row.iterations.abs_diff(want) <= tol && row.status == "converged";
        ok &= good;
        counts.push(row.iterations);
        lines.push(format!(
            "{} {speed} {} p={p} m={m}: {} iterations ({}), expected {want} +/- {tol} [{:.1}s]",
            if good { "ok  " } else { "MISS" },
            operator.name(),
            row.iterations,
            row.status,
            start.elapsed().as_secs_f64()
        ));
    }
    ok
}

fn criterion_1() -> Outcome {
    let targets = [
        ("C1", 1, 4, 14),
        ("C1", 1, 8, 12),
        ("C1", 1, 16, 11),
        ("C1", 3, 4, 22),
        ("C1", 5, 4, 30),
        ("C2", 1, 4, 12),
        ("C3", 1, 4, 11),
        ("C3", 5, 16, 16),
    ];
    let mut lines = Vec::new();
    let passed = count_cells(
        TableId::TwoLevel1d,
        OperatorKind::Corrected,
        &targets,
        2,
        &mut lines,
        &mut Vec::new(),
    );
    Outcome {
        passed,
        title: "two-level 1D iteration counts within 2 on 2^8 x 2^10",
        lines,
    }
}

fn criterion_2() -> Outcome {
    let targets = [
        ("C1", 1, 4, 14),
        ("C1", 3, 4, 23),
        ("C1", 5, 4, 32),
        ("C2", 1, 4, 12),
        ("C3", 5, 16, 17),
    ];
    let mut lines = Vec::new();
    let passed = count_cells(
        TableId::Multilevel1d,
        OperatorKind::Corrected,
        &targets,
        2,
        &mut lines,
        &mut Vec::new(),
    );
    Outcome {
        passed,
        title: "multilevel 1D V-cycle counts within 2 on 2^8 x 2^10",
        lines,
    }
}

fn criterion_3() -> Outcome {
    let t = TableId::Multilevel2d;
    let mut lines = Vec::new();
    let corrected = [
        ("C4", 1, 4, 14),
        ("C4", 3, 4, 22),
        ("C4", 5, 16, 18),
        ("C5", 1, 4, 12),
    ];
    let mut counts = Vec::new();
    let mut passed = count_cells(
        t,
        OperatorKind::Corrected,
        &corrected,
        2,
        &mut lines,
        &mut counts,
    );
    let baseline = [("C4", 1, 4, 50), ("C4", 3, 4, 57)];
    let mut base_counts = Vec::new();
    passed &= count_cells(
        t,
        OperatorKind::Rediscretized,
        &baseline,
        5,
        &mut lines,
        &mut base_counts,
    );
    for (i, &b) in base_counts.iter().enumerate() {
        let c = counts[i];
        let good = b > 3 * c;
        passed &= good;
        lines.push(format!(
            "{} baseline {b} vs corrected {c}: ratio {:.2}, required > 3",
            if good { "ok  " } else { "MISS" },
            b as f64 / c as f64
        ));
    }
    Outcome {
        passed,
        title: "2D V-cycle counts on (2^6)^2 x 2^10 with rediscretized contrast",
        lines,
    }
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    let ms = [2, 4, 8, 16, 32];
    for p in [1, 3] {
        let redis = lfa::sweep(p, &ms, 0.5, 1.0, 0.01, OperatorKind::Rediscretized).unwrap();
        let corr = lfa::sweep(p, &ms, 0.5, 1.0, 0.01, OperatorKind::Corrected).unwrap();
        for m in ms {
            let rmax = redis
                .iter()
                .filter(|r| r.m == m)
                .map(|r| r.rho)
                .fold(0.0, f64::max);
            let cmax = corr
                .iter()
                .filter(|r| r.m == m)
                .map(|r| r.rho)
                .fold(0.0, f64::max);
            let good = rmax > 1.0 && cmax < 1.0;
            passed &= good;
            lines.push(format!(
                "{} p={p} m={m}: max rho rediscretized {rmax:.3}, corrected {cmax:.3}",
                if good { "ok  " } else { "MISS" }
            ));
        }
    }
    Outcome {
        passed,
        title: "Fourier estimate: rediscretized exceeds 1, corrected stays below 1",
        lines,
    }
}

fn criterion_5() -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    let n_x = 128;
    let h = 2.0 / n_x as f64;
    for p in [1, 3] {
        for m in [2, 4] {
            for c in [0.55, 0.65, 0.75, 0.85, 0.95] {
                let cfg = ExperimentConfig {
                    speed: "C1".into(),
                    p,
                    n_x,
                    n_t: 1 << 15,
                    dt: Some(c * h),
                    m: vec![m],
                    seed: Some(0),
                    ..Default::default()
                };
                let rep = execute(&cfg).expect("run");
                let rho =
                    rho_estimate(InterpDegree::new(p).unwrap(), m, c, OperatorKind::Corrected);
                let measured = rep.final_factor.unwrap_or(f64::NAN);
                let good = (measured - rho).abs() <= 0.1;
                passed &= good;
                lines.push(format!(
                    "{} p={p} m={m} c={c}: measured {measured:.4}, estimate {rho:.4} ({} iterations)",
                    if good { "ok  " } else { "MISS" },
                    rep.iterations
                ));
            }
        }
    }
    Outcome {
        passed,
        title: "measured final-iteration factor within 0.1 of the Fourier estimate",
        lines,
    }
}

fn criterion_6() -> Outcome {
    let mut lines = Vec::new();
    let mut passed = true;
    for speed in ["C1", "C3"] {
        let cfg = ExperimentConfig {
            speed: speed.into(),
            n_x: 64,
            n_t: 256,
            operator: "ideal".into(),
            seed: Some(0),
            ..Default::default()
        };
        let rep = execute(&cfg).expect("run");
        let rel = rep.history.last().unwrap() / rep.history[0];
        let good = rep.iterations == 1 && rep.status == "converged" && rel <= 1e-10;
        passed &= good;
        lines.push(format!(
            "{} {speed}: {} iteration(s), relative residual {rel:.2e}",
            if good { "ok  " } else { "MISS" },
            rep.iterations
        ));
    }
    Outcome {
        passed,
        title: "ideal coarse operator converges in one iteration",
        lines,
    }
}

fn suite_outcome(suite: Suite, title: &'static str) -> Outcome {
    let rep = run_suite(suite, 1).expect("suite runs");
    let lines = rep
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {:.4e} (target {:.4e}, tolerance {:.1e}) {}",
                if c.passed { "ok  " } else { "MISS" },
                c.name,
                c.value,
                c.target,
                c.tolerance,
                c.detail
            )
        })
        .collect();
    Outcome {
        passed: rep.all_passed,
        title,
        lines,
    }
}

fn criterion_7() -> Outcome {
    suite_outcome(
        Suite::Truncation,
        "ideal-gap slopes follow the p+1 / p+2 pattern within 0.3 (p = 1)",
    )
}

fn criterion_8() -> Outcome {
    suite_outcome(Suite::Properties, "property backstops")
}

fn main() {
    let criteria: [fn() -> Outcome; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let selected: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .filter(|n| (1..=8).contains(n))
        .collect();
    let mut failed = Vec::new();
    for (i, f) in criteria.iter().enumerate() {
        let n = i + 1;
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let out = f();
        println!(
            "criterion {n}: {} {} [{:.1}s]",
            if out.passed { "PASS" } else { "FAIL" },
            out.title,
            start.elapsed().as_secs_f64()
        );
        for l in &out.lines {
            println!("    {l}");
        }
        if !out.passed {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
