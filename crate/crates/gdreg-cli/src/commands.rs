//! The experiment commands: seeded runs in, CSV/JSON/SVG out.
//!
//! Grid cells and repetitions run on the rayon pool; every aggregation
//! collects in (γ, T, repetition) order so outputs are byte-identical
//! regardless of thread count.

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use gdreg::analysis::{
    check_bounded_path, path_radius, schedule_gamma_t, BoundReport, MeasuredQuantities,
};
use gdreg::concentration::{
    complexity_bounds, empirical_sup_noise, rademacher_gradient, rademacher_scalar,
    NoiseProbeConfig, ProbeConfig, SignMethod,
};
use gdreg::data::{derive_seed, LabelRule, SyntheticModel};
use gdreg::engine::{run, run_streaming, DescentConfig, StreamOptions};
use gdreg::linalg::mean_and_se;
use gdreg::losses::{LossKind, LossModel};
use gdreg::oracle::PopulationOracle;
use gdreg::Dataset;

use crate::config::ExperimentConfig;
use crate::manifest::{write_timing, RunManifest};
use crate::plot::{HeatMap, LinePlot};

fn label_rule(kind: LossKind) -> LabelRule {
    match kind {
        LossKind::LogisticClassification | LossKind::Exponential => LabelRule::SignOfLinear,
        _ => LabelRule::Linear,
    }
}

fn sample_train(cfg: &ExperimentConfig, model: &SyntheticModel, seed: u64) -> Result<Dataset> {
    let rule = label_rule(cfg.loss_kind()?);
    let cap = (cfg.truncate_kappa > 0.0).then_some(cfg.truncate_kappa);
    Ok(model.sample_with(cfg.n_train, seed, rule, cap)?)
}

/// Whether the resolved oracle mode is the analytic one.
fn analytic_oracle(cfg: &ExperimentConfig) -> bool {
    match cfg.oracle.as_str() {
        "analytic" => true,
        "monte_carlo" => false,
        _ => cfg.loss == "squared",
    }
}

/// Test-sample oracle for one repetition (fresh labels, disjoint seed).
fn test_oracle(
    model: &SyntheticModel,
    loss: LossModel,
    test_seed: u64,
    holdout: usize,
) -> Result<PopulationOracle> {
    Ok(PopulationOracle::monte_carlo(
        model,
        loss,
        holdout,
        test_seed,
        label_rule(loss.kind()),
    )?)
}

fn write_file(out_dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::write(out_dir.join(name), content)
        .with_context(|| format!("writing {name} in {}", out_dir.display()))
}

/// Mean ‖v_t − w*‖ over repetitions for t = 1..=T, plus the plot.
pub fn path_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let started = Instant::now();
    let model = gdreg::make_paper_model(cfg.d)?;
    let w_star = model.w_star().to_vec();
    let radius = path_radius(&w_star);
    let threshold = 2.0 * radius / 3.0;
    let reps = cfg.repetitions as u64;

    let results: Vec<(Vec<f64>, bool)> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<(Vec<f64>, bool)> {
            let seeds = cfg.rep_seeds(rep);
            let data = sample_train(cfg, &model, seeds.train)?;
            let loss = LossModel::new(cfg.loss_kind_for(&data)?, data.kappa(), radius)?;
            let descent = DescentConfig::new(cfg.gamma, cfg.iterations);
            let (_, step_ok) = descent.step_condition(data.kappa(), loss.smoothness());
            let opts = StreamOptions {
                track_dist_to: Some(w_star.clone()),
                snapshot_at: vec![],
            };
            let summary = run_streaming(&loss, &data, &descent, &opts)
                .with_context(|| format!("repetition {rep}"))?;
            Ok((summary.dist_trace.expect("trace requested"), step_ok))
        })
        .collect::<Result<_>>()?;
    let compute_done = started.elapsed();

    let t_max = cfg.iterations;
    let mut csv = String::from("t,mean_dist,sd_dist\n");
    let mut points = Vec::with_capacity(t_max);
    for t in 0..t_max {
        let at_t: Vec<f64> = results.iter().map(|(trace, _)| trace[t]).collect();
        let (mean, se) = mean_and_se(&at_t);
        let sd = se * (at_t.len() as f64).sqrt();
        csv.push_str(&format!("{},{mean},{sd}\n", t + 1));
        points.push(((t + 1) as f64, mean));
    }
    write_file(out_dir, "path_experiment.csv", &csv)?;

    let plot = LinePlot {
        title: "mean distance to the population minimizer",
        x_label: "t",
        y_label: "mean ||v_t - w*||",
        points: &points,
        threshold: Some(("2R/3", threshold)),
    };
    write_file(out_dir, "path_experiment.svg", &plot.render())?;

    let violations: Vec<u64> = results
        .iter()
        .enumerate()
        .filter(|(_, (_, ok))| !ok)
        .map(|(i, _)| i as u64)
        .collect();
    let mut manifest = RunManifest::new(
        "path-experiment",
        cfg,
        json!({
            "path_radius": radius,
            "containment_threshold": threshold,
            "step_condition_violating_reps": violations,
        }),
    );
    manifest.files = vec![
        "path_experiment.csv".into(),
        "path_experiment.svg".into(),
        "manifest.json".into(),
        "timing.txt".into(),
    ];
    manifest.write(out_dir)?;
    write_timing(
        out_dir,
        &[
            ("descent".into(), compute_done),
            ("total".into(), started.elapsed()),
        ],
    )?;
    Ok(manifest)
}

#[derive(Debug, Clone, Serialize)]
struct GridCell {
    gamma: f64,
    iterations: usize,
    gamma_t: f64,
    mean_excess: f64,
    sd: f64,
}

/// Mean excess risk of the averaged iterate over a (γ, T) grid.
pub fn grid_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let started = Instant::now();
    let model = gdreg::make_paper_model(cfg.d)?;
    let t_grid = cfg.resolved_t_grid();
    let gammas = cfg.gammas.clone();
    let t_max = *t_grid.last().expect("grid non-empty");
    let n_test = cfg.resolved_n_test();
    let reps = cfg.repetitions as u64;
    let analytic = analytic_oracle(cfg);
    let emit_secondary = cfg.loss == "squared" && analytic;

    // excess[rep][gamma][t_idx]: None marks a diverged cell. The
    // secondary estimate is the test-sample one when the analytic oracle
    // is the headline.
    struct RepOutcome {
        excess: Vec<Vec<Option<f64>>>,
        secondary: Vec<Vec<Option<f64>>>,
        step_violations: Vec<bool>,
        diverged: Vec<Option<String>>,
        oracle_summary: gdreg::OracleSummary,
    }

    let outcomes: Vec<RepOutcome> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<RepOutcome> {
            let seeds = cfg.rep_seeds(rep);
            let data = sample_train(cfg, &model, seeds.train)?;
            let radius = path_radius(model.w_star());
            let loss = LossModel::new(cfg.loss_kind_for(&data)?, data.kappa(), radius)?;
            let mc = test_oracle(&model, loss, seeds.test, n_test)?;
            let headline: PopulationOracle = if analytic {
                PopulationOracle::analytic_squared(model.clone(), loss)?
            } else {
                mc.clone()
            };
            let mut excess = Vec::with_capacity(gammas.len());
            let mut secondary = Vec::with_capacity(gammas.len());
            let mut step_violations = Vec::with_capacity(gammas.len());
            let mut diverged = Vec::with_capacity(gammas.len());
            for &gamma in &gammas {
                let descent = DescentConfig::new(gamma, t_max);
                let (_, ok) = descent.step_condition(data.kappa(), loss.smoothness());
                step_violations.push(!ok);
                let opts = StreamOptions {
                    track_dist_to: None,
                    snapshot_at: t_grid.clone(),
                };
                match run_streaming(&loss, &data, &descent, &opts) {
                    Ok(summary) => {
                        let mut row = Vec::with_capacity(t_grid.len());
                        let mut row2 = Vec::with_capacity(t_grid.len());
                        for (_, avg) in &summary.snapshots {
                            row.push(Some(headline.excess_risk(avg)?.raw));
                            if emit_secondary {
                                row2.push(Some(mc.excess_risk(avg)?.raw));
                            }
                        }
                        excess.push(row);
                        secondary.push(row2);
                        diverged.push(None);
                    }
                    Err(e @ gdreg::Error::DivergedIterate { .. })
                    | Err(e @ gdreg::Error::NonFiniteIterate { .. }) => {
                        excess.push(vec![None; t_grid.len()]);
                        secondary.push(vec![None; t_grid.len()]);
                        diverged.push(Some(e.to_string()));
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            Ok(RepOutcome {
                excess,
                secondary,
                step_violations,
                diverged,
                oracle_summary: headline.summary(),
            })
        })
        .collect::<Result<_>>()?;
    let compute_done = started.elapsed();

    let aggregate = |pick: &dyn Fn(&RepOutcome) -> &Vec<Vec<Option<f64>>>| -> Vec<GridCell> {
        let mut cells = Vec::new();
        for (gi, &gamma) in gammas.iter().enumerate() {
            for (ti, &t) in t_grid.iter().enumerate() {
                let values: Vec<f64> = outcomes
                    .iter()
                    .filter_map(|o| pick(o)[gi][ti])
                    .collect();
                let (mean, se) = if values.is_empty() {
                    (f64::INFINITY, 0.0)
                } else {
                    mean_and_se(&values)
                };
                cells.push(GridCell {
                    gamma,
                    iterations: t,
                    gamma_t: gamma * t as f64,
                    mean_excess: mean,
                    sd: se * (values.len().max(1) as f64).sqrt(),
                });
            }
        }
        cells
    };

    let cells = aggregate(&|o| &o.excess);
    let render_csv = |cells: &[GridCell]| {
        let mut csv = String::from("gamma,T,gamma_T,mean_excess,sd\n");
        for c in cells {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                c.gamma, c.iterations, c.gamma_t, c.mean_excess, c.sd
            ));
        }
        csv
    };
    write_file(out_dir, "grid_experiment.csv", &render_csv(&cells))?;
    let mut files = vec![
        "grid_experiment.csv".to_string(),
        "grid_experiment.svg".to_string(),
        "constant_gamma_t.csv".to_string(),
        "manifest.json".to_string(),
        "timing.txt".to_string(),
    ];
    if emit_secondary {
        let secondary_cells = aggregate(&|o| &o.secondary);
        write_file(out_dir, "grid_experiment_test.csv", &render_csv(&secondary_cells))?;
        files.push("grid_experiment_test.csv".into());
    }

    // Heatmap: rows γ, columns T.
    let values: Vec<Vec<f64>> = gammas
        .iter()
        .enumerate()
        .map(|(gi, _)| {
            t_grid
                .iter()
                .enumerate()
                .map(|(ti, _)| cells[gi * t_grid.len() + ti].mean_excess)
                .collect()
        })
        .collect();
    let col_labels: Vec<String> = t_grid.iter().map(|t| t.to_string()).collect();
    let row_labels: Vec<String> = gammas.iter().map(|g| g.to_string()).collect();
    let map = HeatMap {
        title: "mean excess risk of the averaged iterate",
        x_label: "T",
        y_label: "gamma",
        col_labels: &col_labels,
        row_labels: &row_labels,
        values: &values,
    };
    write_file(out_dir, "grid_experiment.svg", &map.render())?;

    // Constant-γT diagnostic: groups of cells sharing a product.
    let mut diag = String::from("gamma_t,cells,min_mean_excess,max_mean_excess,max_rel_diff\n");
    let mut products: Vec<f64> = cells.iter().map(|c| c.gamma_t).collect();
    products.sort_by(f64::total_cmp);
    products.dedup();
    for p in products {
        let group: Vec<&GridCell> = cells
            .iter()
            .filter(|c| c.gamma_t == p && c.mean_excess.is_finite())
            .collect();
        if group.len() < 2 {
            continue;
        }
        let lo = group.iter().map(|c| c.mean_excess).fold(f64::INFINITY, f64::min);
        let hi = group
            .iter()
            .map(|c| c.mean_excess)
            .fold(f64::NEG_INFINITY, f64::max);
        let rel = if hi.abs() > 0.0 { (hi - lo) / hi.abs() } else { 0.0 };
        diag.push_str(&format!("{p},{},{lo},{hi},{rel}\n", group.len()));
    }
    write_file(out_dir, "constant_gamma_t.csv", &diag)?;

    let violation_counts: Vec<usize> = (0..gammas.len())
        .map(|gi| outcomes.iter().filter(|o| o.step_violations[gi]).count())
        .collect();
    let gammas_ref = &gammas;
    let diverged: Vec<String> = outcomes
        .iter()
        .enumerate()
        .flat_map(|(rep, o)| {
            o.diverged.iter().enumerate().filter_map(move |(gi, d)| {
                d.as_ref()
                    .map(|msg| format!("rep {rep}, gamma {}: {msg}", gammas_ref[gi]))
            })
        })
        .collect();
    let mut manifest = RunManifest::new(
        "grid-experiment",
        cfg,
        json!({
            "oracle_mode": if analytic { "analytic" } else { "monte_carlo" },
            "oracle": outcomes[0].oracle_summary,
            "t_grid": t_grid,
            "n_test": n_test,
            "step_condition_violations_per_gamma":
                gammas.iter().zip(&violation_counts).collect::<Vec<_>>(),
            "diverged_cells": diverged,
        }),
    );
    manifest.files = files;
    manifest.write(out_dir)?;
    write_timing(
        out_dir,
        &[
            ("runs".into(), compute_done),
            ("total".into(), started.elapsed()),
        ],
    )?;
    Ok(manifest)
}

/// One run at the γT schedule, with every bound next to its measurement.
pub fn bounds(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let started = Instant::now();
    let model = gdreg::make_paper_model(cfg.d)?;
    let seeds = cfg.rep_seeds(0);
    let data = sample_train(cfg, &model, seeds.train)?;
    let radius_hint = path_radius(model.w_star());
    let loss = LossModel::new(cfg.loss_kind_for(&data)?, data.kappa(), radius_hint)?;
    let oracle: PopulationOracle = if analytic_oracle(cfg) {
        PopulationOracle::analytic_squared(model.clone(), loss)?
    } else {
        test_oracle(
            &model,
            loss,
            seeds.test,
            cfg.n_train * cfg.oracle_holdout_factor.max(1),
        )?
    };
    let w_star = oracle.w_star().to_vec();
    let radius = path_radius(&w_star);
    let (l, m) = (loss.lipschitz(), loss.smoothness());
    let kappa = data.kappa();

    // The sample-size condition holds with equality exactly at the
    // schedule; stay a whisker inside so rounding cannot flip it.
    let gamma_t = schedule_gamma_t(cfg.n_train, kappa, l, m, cfg.delta) * (1.0 - 1e-9);
    let gamma_max = (1.0 / (kappa * kappa * m)).min(1.0);
    let iterations = ((gamma_t / gamma_max).ceil() as usize).max(3);
    let gamma = gamma_t / iterations as f64;

    let path = run(&loss, &data, &DescentConfig::new(gamma, iterations))?;
    let averaged = path.averaged_iterate();
    let probes = NoiseProbeConfig {
        ball_points: cfg.noise_probe_points,
        sphere_points: cfg.noise_probe_points,
        seed: derive_seed(cfg.seed, 0xB0),
    };
    let sup_noise = empirical_sup_noise(&oracle, &data, radius, &probes, Some(&path))?;
    let containment = check_bounded_path(&path, &w_star, radius);

    let decomposition = gdreg::analysis::decompose(&oracle, &data, &path, &w_star)?;
    let mut text = serde_json::to_string_pretty(&decomposition)?;
    text.push('\n');
    write_file(out_dir, "decomposition.json", &text)?;
    let mut step_csv = Vec::new();
    gdreg::analysis::write_step_csv(&oracle, &path, kappa, &w_star, &mut step_csv)?;
    write_file(out_dir, "decomposition_steps.csv", std::str::from_utf8(&step_csv)?)?;

    let mut report = BoundReport::assemble(
        &loss,
        &w_star,
        data.n(),
        gamma,
        iterations,
        kappa,
        cfg.delta,
    );
    report.measured = Some(MeasuredQuantities {
        excess_risk_avg: oracle.excess_risk(&averaged)?.value,
        excess_risk_last: oracle.excess_risk(path.last_iterate())?.value,
        sup_gradient_noise: sup_noise,
        path_contained: containment.contained,
        first_violation: containment.first_violation,
    });
    if !report.n_condition_ok {
        eprintln!(
            "warning: the sample-size condition fails at n = {} with gamma*T = {:.3e}; \
             the excess-risk bounds are not guaranteed at this scale",
            data.n(),
            report.gamma_t
        );
    }

    let mut text = serde_json::to_string_pretty(&json!({
        "report": report,
        "oracle": oracle.summary(),
        "kappa": kappa,
        "lipschitz": l,
        "smoothness": m,
        "gamma": gamma,
        "iterations": iterations,
    }))?;
    text.push('\n');
    write_file(out_dir, "bound_report.json", &text)?;

    let mut manifest = RunManifest::new(
        "bounds",
        cfg,
        json!({
            "n_condition_ok": report.n_condition_ok,
            "step_condition_ok": report.step_condition_ok,
            "oracle": oracle.summary(),
        }),
    );
    manifest.files = vec![
        "bound_report.json".into(),
        "decomposition.json".into(),
        "decomposition_steps.csv".into(),
        "manifest.json".into(),
        "timing.txt".into(),
    ];
    manifest.write(out_dir)?;
    write_timing(out_dir, &[("total".into(), started.elapsed())])?;
    Ok(manifest)
}

/// Rademacher-complexity estimates with their closed-form bounds.
pub fn rademacher(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let started = Instant::now();
    let model = gdreg::make_paper_model(cfg.d)?;
    let seeds = cfg.rep_seeds(0);
    let data = sample_train(cfg, &model, seeds.train)?;
    let radius = path_radius(model.w_star());
    let loss = LossModel::new(cfg.loss_kind_for(&data)?, data.kappa(), radius)?;
    let (scalar_bound, gradient_bound) = complexity_bounds(
        data.kappa(),
        loss.lipschitz(),
        loss.smoothness(),
        radius,
        data.n(),
    );
    let probes = ProbeConfig {
        sphere_points: cfg.probe_sphere_points,
        ascent_starts: cfg.probe_ascent_starts,
        ascent_steps: 30,
        seed: derive_seed(cfg.seed, 0xAD),
    };

    let mut records = Vec::new();
    let mut push = |class: &str, est: gdreg::RademacherEstimate, bound: f64| {
        records.push(json!({
            "class": class,
            "n": data.n(),
            "R": radius,
            "method": est.method,
            "value": est.value,
            "std_error": est.std_error,
            "bound": bound,
        }));
    };
    let scalar_mc = SignMethod::MonteCarlo {
        draws: cfg.rademacher_draws,
        seed: derive_seed(cfg.seed, 0xE1),
    };
    push("scalar", rademacher_scalar(&data, radius, scalar_mc)?, scalar_bound);
    let gradient_mc = SignMethod::MonteCarlo {
        draws: cfg.rademacher_gradient_draws,
        seed: derive_seed(cfg.seed, 0xE2),
    };
    push(
        "gradient_composite",
        rademacher_gradient(&loss, &data, radius, gradient_mc, &probes)?,
        gradient_bound,
    );
    if data.n() <= gdreg::concentration::EXHAUSTIVE_MAX_N {
        push(
            "scalar",
            rademacher_scalar(&data, radius, SignMethod::Exhaustive)?,
            scalar_bound,
        );
        push(
            "gradient_composite",
            rademacher_gradient(&loss, &data, radius, SignMethod::Exhaustive, &probes)?,
            gradient_bound,
        );
    }
    let mut text = serde_json::to_string_pretty(&records)?;
    text.push('\n');
    write_file(out_dir, "rademacher.json", &text)?;

    let mut manifest = RunManifest::new(
        "rademacher",
        cfg,
        json!({ "radius": radius, "kappa": data.kappa() }),
    );
    manifest.files = vec![
        "rademacher.json".into(),
        "manifest.json".into(),
        "timing.txt".into(),
    ];
    manifest.write(out_dir)?;
    write_timing(out_dir, &[("total".into(), started.elapsed())])?;
    Ok(manifest)
}

/// Dispatch by command name, used by the binary and by manifest re-runs.
pub fn dispatch(command: &str, cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    match command {
        "path-experiment" => path_experiment(cfg, out_dir),
        "grid-experiment" => grid_experiment(cfg, out_dir),
        "bounds" => bounds(cfg, out_dir),
        "rademacher" => rademacher(cfg, out_dir),
        other => bail!("unknown command `{other}`"),
    }
}

/// Re-run a manifest bit-identically into a directory.
pub fn rerun_manifest(manifest_path: &Path, out_dir: &Path) -> Result<RunManifest> {
    let manifest = RunManifest::read(manifest_path)?;
    if manifest.schema_version != crate::manifest::SCHEMA_VERSION {
        return Err(anyhow!(
            "manifest schema {} unsupported (expected {})",
            manifest.schema_version,
            crate::manifest::SCHEMA_VERSION
        ));
    }
    dispatch(&manifest.command, &manifest.config, out_dir)
}
