//! The five subcommand bodies. Each one resolves its inputs through
//! [`crate::config`], computes with `cascade-core`, writes its artifacts
//! atomically through [`crate::output`], and keeps stdout for
//! human-readable progress; files carry the data.

use std::path::Path;

use cascade_core::acceptance::{self, CriterionReport};
use cascade_core::cascade::{run_continuous, SnapshotSpec, Trajectory};
use cascade_core::cgm::build_multigraph;
use cascade_core::mc;
use cascade_core::seed::{mix_seed, STREAM_BUILD, STREAM_REALIZE, STREAM_RUN};
use cascade_core::stats::{self, SummaryStats};
use cascade_core::theory;
use serde::Serialize;

use crate::config::Settings;
use crate::output::{write_csv_records, write_csv_rows, write_json};
use crate::CliError;

/// Shortest round-trip decimal rendering, the same for every worker count.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// `theory.json` payload: the analytic solution plus its diagnostics.
/// `t_star` serializes as `null` when the process never stops.
#[derive(Serialize)]
struct TheoryJson {
    lambda: f64,
    z_hat: f64,
    t_star: f64,
    a_hat_star: f64,
    sigma2_star: f64,
    diagnostics: DiagnosticsJson,
}

#[derive(Serialize)]
struct DiagnosticsJson {
    root_bracket: [f64; 2],
    tangency: bool,
    sigma2_quad_error: f64,
    sigma2_closed_form: f64,
    a_hat_variant: f64,
}

/// `theory`: solve the limits, write `theory.json` and `theory_curve.csv`.
pub fn theory(s: &Settings) -> Result<(), CliError> {
    let solved = theory::solve(&s.dist, &s.quad)?;
    let json = TheoryJson {
        lambda: solved.lambda,
        z_hat: solved.z_hat,
        t_star: solved.t_star,
        a_hat_star: solved.a_hat_star,
        sigma2_star: solved.sigma2_star,
        diagnostics: DiagnosticsJson {
            root_bracket: [
                solved.diagnostics.root_bracket.0,
                solved.diagnostics.root_bracket.1,
            ],
            tangency: solved.diagnostics.tangency,
            sigma2_quad_error: solved.diagnostics.sigma2_quad_error,
            sigma2_closed_form: solved.diagnostics.sigma2_closed_form,
            a_hat_variant: solved.diagnostics.a_hat_variant,
        },
    };
    let json_path = s.out_dir.join("theory.json");
    write_json(&json_path, &json)?;

    let max_t = s.curve_max_t.unwrap_or(if solved.t_star.is_finite() {
        solved.t_star + 1.0
    } else {
        s.quad.t_horizon
    });
    let pts = s.curve_points;
    let mut rows = Vec::with_capacity(pts);
    for i in 0..pts {
        let t = max_t * i as f64 / (pts - 1) as f64;
        let a = theory::a_hat(&s.dist, t)?;
        let sig = theory::sigma2_a(&s.dist, t, &s.quad)?.value;
        rows.push(vec![fmt_f64(t), fmt_f64(a), fmt_f64(sig)]);
    }
    let curve_path = s.out_dir.join("theory_curve.csv");
    write_csv_rows(&curve_path, &["t", "a_hat", "sigma2"], rows)?;

    println!(
        "theory: lambda = {}, z_hat = {}, t_star = {}, a_hat_star = {}, sigma2_star = {}",
        solved.lambda, solved.z_hat, solved.t_star, solved.a_hat_star, solved.sigma2_star
    );
    if !solved.t_star.is_finite() {
        println!(
            "note: the stopping root is 0, so the process never stops in the limit; \
             values above are evaluated at the horizon t = {} and t_star is null in the JSON",
            s.quad.t_horizon
        );
    }
    if solved.diagnostics.tangency {
        println!(
            "warning: the stopping root is a tangency (no sign change); \
             normal-limit claims are unsupported there and the variance is indicative only"
        );
    }
    println!(
        "wrote {} and {} ({} grid points on [0, {}])",
        json_path.display(),
        curve_path.display(),
        pts,
        max_t
    );
    Ok(())
}

/// Event rows of `trajectory.csv`. An empty event log (a realization with
/// no seeds) still yields one terminal stop row, with the `H_A = -1`
/// sentinel marking the removal demand that could not be served at t = 0.
fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    if traj.events.is_empty() {
        let p = traj.series[0];
        return vec![vec![
            fmt_f64(0.0),
            "stop".to_string(),
            "-1".to_string(),
            p.h_b.to_string(),
            p.a_n.to_string(),
            p.b_n.to_string(),
        ]];
    }
    traj.events
        .iter()
        .zip(&traj.series[1..])
        .map(|(event, point)| {
            vec![
                fmt_f64(event.time),
                event.kind.label().to_string(),
                point.h_a.to_string(),
                point.h_b.to_string(),
                point.a_n.to_string(),
                point.b_n.to_string(),
            ]
        })
        .collect()
}

/// `simulate`: one event-driven run; writes `trajectory.csv` and
/// `occupancy.csv`. With `--seed` set to the `seed` column of a trial
/// record, this reproduces that trial's trajectory exactly.
pub fn simulate(s: &Settings) -> Result<(), CliError> {
    let seq = s
        .dist
        .realize_sampled(s.n, mix_seed(s.seed, STREAM_REALIZE));
    let graph = build_multigraph(&seq, mix_seed(s.seed, STREAM_BUILD))?;
    let spec = if s.snapshot_points == 0 {
        SnapshotSpec::Off
    } else {
        SnapshotSpec::Uniform(s.snapshot_points)
    };
    let (traj, result) =
        run_continuous(&graph, seq.thresholds(), mix_seed(s.seed, STREAM_RUN), spec)?;

    let traj_path = s.out_dir.join("trajectory.csv");
    write_csv_rows(
        &traj_path,
        &["time", "event_kind", "H_A", "H_B", "A_n", "B_n"],
        trajectory_rows(&traj),
    )?;

    let occ_path = s.out_dir.join("occupancy.csv");
    let occ_rows = traj.occupancy.iter().flat_map(|snap| {
        snap.counts.iter().map(|(&(d, theta, white), &count)| {
            vec![
                fmt_f64(snap.time),
                d.to_string(),
                theta.to_string(),
                white.to_string(),
                count.to_string(),
            ]
        })
    });
    write_csv_rows(
        &occ_path,
        &["time", "d", "theta", "white", "count"],
        occ_rows,
    )?;

    if let Some(node) = seq.parity_adjusted() {
        println!(
            "note: degree sum was odd; one half-edge was added to node {node} to make it pairable"
        );
    }
    println!(
        "simulate: n = {}, m = {} edges, final active = {} ({:.4} of n), tau = {}",
        graph.n(),
        graph.m(),
        result.final_size,
        result.final_size as f64 / graph.n() as f64,
        traj.tau
    );
    println!(
        "wrote {} ({} rows) and {} ({} snapshots)",
        traj_path.display(),
        traj.events.len().max(1),
        occ_path.display(),
        traj.occupancy.len()
    );
    Ok(())
}

/// `verify_summary.json` payload. Worker count and wall-clock timings are
/// deliberately excluded: the file is byte-identical for any `--workers`.
#[derive(Serialize)]
struct VerifySummary<'a> {
    pass: bool,
    criteria: &'a [CriterionReport],
    clt_summary: SummaryStats,
}

fn announce(report: &CriterionReport) {
    println!(
        "criterion {} ({}): {} - {} ({:.1}s)",
        report.id,
        report.name,
        if report.pass { "PASS" } else { "FAIL" },
        report.details,
        report.elapsed_seconds
    );
}

/// `verify`: run the statistical verification suite, stream one line per
/// criterion to stdout, and write `verify_clt_records.csv` plus
/// `verify_summary.json`. Returns the verification error (exit code 3)
/// when any criterion fails; the artifacts are written either way.
pub fn verify(out_dir: &Path, workers: usize, inject_sigma2: Option<f64>) -> Result<(), CliError> {
    println!("running verification suite (workers = {workers}, pinned seeds)");
    let mut criteria = Vec::with_capacity(7);
    let mut push = |r: CriterionReport| {
        announce(&r);
        criteria.push(r);
    };

    push(acceptance::criterion_oracle_equivalence());
    push(acceptance::criterion_death_process());
    push(acceptance::criterion_stopping_time(workers));
    push(acceptance::criterion_final_size_lln(workers));

    let batch_started = std::time::Instant::now();
    let records = acceptance::clt_trial_records(workers).map_err(CliError::Numerical)?;
    println!(
        "computed {} fluctuation records ({:.1}s)",
        records.len(),
        batch_started.elapsed().as_secs_f64()
    );
    let records_path = out_dir.join("verify_clt_records.csv");
    write_csv_records(&records_path, &records)?;
    let sigma2 = match inject_sigma2 {
        Some(v) => v,
        None => acceptance::clt_reference_sigma2()?,
    };
    push(acceptance::criterion_clt_with(&records, sigma2));

    push(acceptance::criterion_hb_trajectory());
    push(acceptance::criterion_analytic_sanity());

    let xis: Vec<f64> = records.iter().map(|r| r.xi).collect();
    let clt_summary = stats::summarize(&xis, 0.0, sigma2)?;
    let pass = criteria.iter().all(|c| c.pass);
    let summary_path = out_dir.join("verify_summary.json");
    write_json(
        &summary_path,
        &VerifySummary {
            pass,
            criteria: &criteria,
            clt_summary,
        },
    )?;
    println!(
        "wrote {} ({} records) and {}",
        records_path.display(),
        xis.len(),
        summary_path.display()
    );

    if pass {
        println!("verification suite: all {} criteria passed", criteria.len());
        Ok(())
    } else {
        let failed: Vec<String> = criteria
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} ({})", c.id, c.name))
            .collect();
        Err(CliError::Verification(format!(
            "criteria failed: {}",
            failed.join(", ")
        )))
    }
}

/// `sweep`: finite-size convergence table over a population ladder;
/// writes `sweep.csv`.
pub fn sweep(s: &Settings) -> Result<(), CliError> {
    let eval_time = match s.eval_time {
        Some(t) => t,
        None => {
            let solved = theory::solve(&s.dist, &s.quad)?;
            if solved.t_star.is_finite() {
                solved.t_star + 1.0
            } else {
                s.quad.t_horizon
            }
        }
    };
    println!(
        "sweep: {} sizes, {} trials each, evaluation time t = {eval_time}",
        s.n_list.len(),
        s.trials
    );
    let rows = mc::convergence_sweep(&s.dist, &s.n_list, s.trials, s.seed, eval_time, s.workers)?;
    for row in &rows {
        let var = row
            .var_xi
            .map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        println!(
            "  n = {:>9}: mean final fraction {:.6}, var(xi) {}, mean tau {:.6}",
            row.n, row.mean_final_fraction, var, row.mean_tau
        );
    }
    let path = s.out_dir.join("sweep.csv");
    write_csv_records(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// `graph`: realize one configuration-model multigraph and write its edge
/// list as `edges.csv` (0-based endpoints; loops as `i,i`; parallel edges
/// repeated).
pub fn graph(s: &Settings) -> Result<(), CliError> {
    let seq = s
        .dist
        .realize_sampled(s.n, mix_seed(s.seed, STREAM_REALIZE));
    let graph = build_multigraph(&seq, mix_seed(s.seed, STREAM_BUILD))?;
    let edges = graph.edges();
    let rows = edges
        .iter()
        .map(|&(u, v)| vec![u.to_string(), v.to_string()]);
    let path = s.out_dir.join("edges.csv");
    write_csv_rows(&path, &["u", "v"], rows)?;

    if let Some(node) = seq.parity_adjusted() {
        println!(
            "note: degree sum was odd; one half-edge was added to node {node} to make it pairable"
        );
    }
    println!(
        "graph: n = {}, m = {} edges, simple = {}",
        graph.n(),
        graph.m(),
        graph.is_simple()
    );
    println!("wrote {}", path.display());
    Ok(())
}
