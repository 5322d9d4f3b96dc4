//! The release-gate property suite: every core identity and inequality
//! checked at fixed seeds, printed as a pass/fail table.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gdreg::analysis::{
    decompose, excess_risk_bounds, last_iterate_identity, path_radius,
    path_recursion_residuals, risk_step_residual, sample_size_condition, schedule_gamma_t,
};
use gdreg::concentration::{
    complexity_bounds, concentration_bound, rademacher_gradient, rademacher_scalar, ProbeConfig,
    SignMethod,
};
use gdreg::data::make_paper_model;
use gdreg::engine::{run, DescentConfig};
use gdreg::losses::{LossKind, LossModel};
use gdreg::oracle::PopulationOracle;

type CheckResult = Result<String, String>;
type Check = (&'static str, fn() -> CheckResult);

fn all_loss_models() -> Vec<LossModel> {
    [
        LossKind::Squared { label_bound: 1.0 },
        LossKind::LogisticRegression,
        LossKind::LogisticClassification,
        LossKind::Exponential,
    ]
    .into_iter()
    .map(|k| LossModel::new(k, 1.0, 1.0).expect("valid loss"))
    .collect()
}

fn sample_pair(m: &LossModel, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (lo, hi) = m.working_interval();
    let a = rng.random_range(lo..=hi);
    let y = match m.kind() {
        LossKind::Squared { label_bound } => rng.random_range(-label_bound..=label_bound),
        LossKind::LogisticRegression => rng.random_range(-3.0..=3.0),
        _ => {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }
    };
    (y, a)
}

fn loss_derivative_fidelity() -> CheckResult {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for m in all_loss_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..10_000 {
            let (y, a) = sample_pair(&m, &mut rng);
            let fd = (m.value_unchecked(y, a + h) - m.value_unchecked(y, a - h)) / (2.0 * h);
            let an = m.derivative_unchecked(y, a);
            let rel = (fd - an).abs() / an.abs().max(1.0);
            worst = worst.max(rel);
            if rel > 1e-6 {
                return Err(format!(
                    "{}: derivative mismatch {rel:.2e} at (y={y}, a={a})",
                    m.kind().name()
                ));
            }
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

fn loss_constants_certified() -> CheckResult {
    for m in all_loss_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for _ in 0..10_000 {
            let (y, a) = sample_pair(&m, &mut rng);
            let (_, b) = sample_pair(&m, &mut rng);
            let gap = (a - b).abs();
            if (m.value_unchecked(y, a) - m.value_unchecked(y, b)).abs()
                > m.lipschitz() * gap + 1e-12
            {
                return Err(format!("{}: Lipschitz constant violated", m.kind().name()));
            }
            if (m.derivative_unchecked(y, a) - m.derivative_unchecked(y, b)).abs()
                > m.smoothness() * gap + 1e-12
            {
                return Err(format!("{}: smoothness constant violated", m.kind().name()));
            }
        }
    }
    Ok("all four losses certified on 10^4 pairs".into())
}

fn loss_convexity() -> CheckResult {
    for m in all_loss_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(107);
        for _ in 0..10_000 {
            let (y, a) = sample_pair(&m, &mut rng);
            let (_, b) = sample_pair(&m, &mut rng);
            let lam: f64 = rng.random_range(0.0..=1.0);
            let mid = m.value_unchecked(y, lam * a + (1.0 - lam) * b);
            let chord = lam * m.value_unchecked(y, a) + (1.0 - lam) * m.value_unchecked(y, b);
            if mid > chord + 1e-12 || m.value_unchecked(y, a) < 0.0 {
                return Err(format!("{}: convexity/nonnegativity violated", m.kind().name()));
            }
        }
    }
    Ok("convex and nonnegative on the working interval".into())
}

fn sequence_identity() -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let len: usize = rng.random_range(1..=1000);
        let q: Vec<f64> = (0..len).map(|_| rng.random_range(-1e3..1e3)).collect();
        let (lhs, rhs) = last_iterate_identity(&q).map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).abs());
    }
    if worst <= 1e-10 {
        Ok(format!("max |lhs - rhs| = {worst:.2e}"))
    } else {
        Err(format!("identity deviation {worst:.2e} exceeds 1e-10"))
    }
}

struct SquaredRun {
    data: gdreg::Dataset,
    oracle: PopulationOracle,
    path: gdreg::DescentPath,
}

fn squared_run(seed: u64, n: usize, d: usize, iterations: usize) -> Result<SquaredRun, String> {
    let model = make_paper_model(d).map_err(|e| e.to_string())?;
    let data = model.sample(n, seed).map_err(|e| e.to_string())?;
    let loss = LossModel::new(
        LossKind::Squared {
            label_bound: data.max_abs_label().max(1.0),
        },
        data.kappa(),
        path_radius(model.w_star()),
    )
    .map_err(|e| e.to_string())?;
    let gamma = (1.0 / (data.kappa() * data.kappa() * loss.smoothness())).min(1.0);
    let oracle = PopulationOracle::analytic_squared(model, loss).map_err(|e| e.to_string())?;
    let path = run(&loss, &data, &DescentConfig::new(gamma, iterations))
        .map_err(|e| e.to_string())?;
    Ok(SquaredRun { data, oracle, path })
}

fn risk_step_residuals() -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..3 {
        let r = squared_run(seed, 500, 20, 200)?;
        let w = r.oracle.w_star().to_vec();
        for t in 1..=r.path.iterations() {
            let res = risk_step_residual(&r.oracle, &r.path, t, &w).map_err(|e| e.to_string())?;
            worst = worst.max(res);
            if res > 1e-8 {
                return Err(format!("seed {seed}, t {t}: residual {res:.2e}"));
            }
        }
    }
    Ok(format!("worst residual {worst:.2e}"))
}

fn path_recursion() -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..3 {
        let r = squared_run(seed, 500, 20, 500)?;
        let residuals = path_recursion_residuals(&r.oracle, &r.path, r.data.kappa())
            .map_err(|e| e.to_string())?;
        for (t, res) in residuals.iter().enumerate() {
            worst = worst.max(*res);
            if *res > 1e-8 {
                return Err(format!("seed {seed}, t {t}: residual {res:.2e}"));
            }
        }
    }
    Ok(format!("worst residual {worst:.2e}"))
}

fn excess_risk_decomposition() -> CheckResult {
    let mut worst = f64::NEG_INFINITY;
    for (seed, iterations) in [(0u64, 10usize), (1, 100), (2, 1000)] {
        let r = squared_run(seed + 10, 1000, 50, iterations)?;
        let report = decompose(&r.oracle, &r.data, &r.path, r.oracle.w_star())
            .map_err(|e| e.to_string())?;
        if !report.step_condition_ok {
            return Err("step condition unexpectedly violated".into());
        }
        worst = worst.max(report.avg_residual()).max(report.last_residual());
        if report.avg_residual() > 1e-8 || report.last_residual() > 1e-8 {
            return Err(format!(
                "T {iterations}: residuals avg {:.2e}, last {:.2e}",
                report.avg_residual(),
                report.last_residual()
            ));
        }
    }
    Ok(format!("worst residual {worst:.2e}"))
}

fn decomposition_mutation_sentinel() -> CheckResult {
    // Negating the variance part must be detected as a violation;
    // otherwise the decomposition check has no teeth.
    let r = squared_run(13, 60, 30, 400)?;
    let report = decompose(&r.oracle, &r.data, &r.path, r.oracle.w_star())
        .map_err(|e| e.to_string())?;
    let t = report.variance_terms.len() as f64;
    let flipped = report.bias_term - report.variance_terms.iter().sum::<f64>() / t;
    if report.lhs_avg > flipped + 1e-8 {
        Ok("sign flip detected as expected".into())
    } else {
        Err("sign-flipped variance term went undetected".into())
    }
}

fn rademacher_cross_check() -> CheckResult {
    let model = make_paper_model(3).map_err(|e| e.to_string())?;
    let data = model.sample(10, 77).map_err(|e| e.to_string())?;
    let radius = 1.5;
    let loss =
        LossModel::new(LossKind::LogisticRegression, data.kappa(), radius).map_err(|e| e.to_string())?;
    let probes = ProbeConfig {
        sphere_points: 64,
        ascent_starts: 8,
        ascent_steps: 20,
        seed: 7,
    };
    let mc = SignMethod::MonteCarlo { draws: 10_000, seed: 99 };
    let (scalar_bound, gradient_bound) = complexity_bounds(
        data.kappa(),
        loss.lipschitz(),
        loss.smoothness(),
        radius,
        data.n(),
    );

    let s_ex = rademacher_scalar(&data, radius, SignMethod::Exhaustive).map_err(|e| e.to_string())?;
    let s_mc = rademacher_scalar(&data, radius, mc).map_err(|e| e.to_string())?;
    if (s_ex.value - s_mc.value).abs() > 3.0 * s_mc.std_error {
        return Err(format!(
            "scalar: exhaustive {} vs MC {} ± {}",
            s_ex.value, s_mc.value, s_mc.std_error
        ));
    }
    if s_ex.value > scalar_bound || s_mc.value > scalar_bound + 3.0 * s_mc.std_error {
        return Err("scalar estimate exceeds its closed-form bound".into());
    }

    let g_ex = rademacher_gradient(&loss, &data, radius, SignMethod::Exhaustive, &probes)
        .map_err(|e| e.to_string())?;
    let g_mc =
        rademacher_gradient(&loss, &data, radius, mc, &probes).map_err(|e| e.to_string())?;
    if (g_ex.value - g_mc.value).abs() > 3.0 * g_mc.std_error {
        return Err(format!(
            "gradient: exhaustive {} vs MC {} ± {}",
            g_ex.value, g_mc.value, g_mc.std_error
        ));
    }
    if g_ex.value > gradient_bound || g_mc.value > gradient_bound + 3.0 * g_mc.std_error {
        return Err("gradient estimate exceeds its closed-form bound".into());
    }
    Ok(format!(
        "scalar {:.4} vs {:.4}, gradient {:.4} vs {:.4}",
        s_ex.value, s_mc.value, g_ex.value, g_mc.value
    ))
}

fn concentration_dominance() -> CheckResult {
    for &kappa in &[1.0, 2.0, 4.0] {
        for &l in &[0.5, 1.0, 5.0] {
            for &m in &[0.25, 1.0, 2.0] {
                for &radius in &[1.0, 3.0] {
                    for &n in &[16usize, 400, 10_000] {
                        let b = concentration_bound(kappa, l, m, radius, n, 0.05);
                        if b.condition_ok && b.simplified < b.raw {
                            return Err(format!(
                                "simplified < raw at κ={kappa}, L={l}, M={m}, R={radius}, n={n}"
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok("simplified form dominates the three-term bound".into())
}

fn formula_round_numbers() -> CheckResult {
    let delta = 4.0 / std::f64::consts::E;
    if !sample_size_condition(810_000, 2.5, 1.0, 1.0, 1.0, delta)
        || sample_size_condition(809_999, 2.5, 1.0, 1.0, 1.0, delta)
    {
        return Err("sample-size condition arithmetic".into());
    }
    if (schedule_gamma_t(810_000, 1.0, 1.0, 1.0, delta) - 2.5).abs() > 1e-12 {
        return Err("schedule arithmetic".into());
    }
    let b = excess_risk_bounds(1_000_000, 10.0, 3.0, delta, &[1.0], 1.0, 1.0, 1.0);
    if (b.avg_bound - 0.41).abs() > 1e-12 {
        return Err("averaged-iterate bound arithmetic".into());
    }
    let c = concentration_bound(1.0, 1.0, 1.0, 1.0, 1600, delta);
    if (c.simplified - 1.0).abs() > 1e-12 {
        return Err("concentration bound arithmetic".into());
    }
    Ok("all closed forms reproduce their round-number examples".into())
}

/// Run every check, print the table, and return whether all passed.
pub fn run_all() -> bool {
    let checks: Vec<Check> = vec![
        ("loss derivative fidelity", loss_derivative_fidelity),
        ("loss constants certified", loss_constants_certified),
        ("loss convexity", loss_convexity),
        ("sequence tail identity", sequence_identity),
        ("risk-step inequality", risk_step_residuals),
        ("path recursion inequality", path_recursion),
        ("excess-risk decomposition", excess_risk_decomposition),
        ("decomposition mutation sentinel", decomposition_mutation_sentinel),
        ("rademacher cross-check", rademacher_cross_check),
        ("concentration dominance", concentration_dominance),
        ("formula round numbers", formula_round_numbers),
    ];
    let mut all_ok = true;
    println!("{:<36} {:<6} {:>8}  detail", "check", "result", "time");
    println!("{}", "-".repeat(96));
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{name:<36} PASS   {elapsed:>7.2}s  {detail}"),
            Err(msg) => {
                all_ok = false;
                println!("{name:<36} FAIL   {elapsed:>7.2}s  {msg}");
            }
        }
    }
    println!("{}", "-".repeat(96));
    println!("overall: {}", if all_ok { "PASS" } else { "FAIL" });
    all_ok
}
