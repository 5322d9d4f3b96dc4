//! Executable forms of the excess-risk decomposition and the
//! high-probability bounds.
//!
//! The decomposition splits the excess risk of the averaged iterate into
//! a bias part ‖v₀ − w‖²/(2γT) and a variance part averaging the inner
//! products ⟨∇L(v_{t−1}) − ∇L̂(v_{t−1}), v_t − w⟩; the last iterate picks
//! up weighted correction terms on top. Each inequality is evaluated as a
//! residual (lhs − rhs, nonpositive when the claim holds) so tests can
//! pin exact tolerances.
//!
//! The closed-form side: the path radius R = max{1, 3‖w*‖}, the sample
//! size condition √n ≥ max{1, 90γTκ²(1+κL)(M+L)}√log(4/δ), the γT
//! schedule that balances bias against concentration, and the resulting
//! excess-risk bounds for the averaged and last iterate.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::engine::DescentPath;
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, neumaier_sum, norm, norm_sq, sub, CompensatedSum};
use crate::losses::LossModel;
use crate::oracle::PopulationOracle;

/// Evaluate both sides of the identity expressing the last element of a
/// real sequence q_1..q_T through the running mean plus weighted tail
/// corrections:
///
/// q_T = (1/T)Σ q_t + Σ_{t=1}^{T−1} 1/(t(t+1)) Σ_{s=T−t+1}^{T} (q_s − q_{T−t})
///
/// Returns (lhs, rhs); the two agree up to rounding for every sequence.
pub fn last_iterate_identity(q: &[f64]) -> Result<(f64, f64)> {
    let t_max = q.len();
    if t_max == 0 {
        return Err(Error::EmptySequence);
    }
    let lhs = q[t_max - 1];
    let mean = neumaier_sum(q.iter().copied()) / t_max as f64;
    let mut corrections = CompensatedSum::new();
    for t in 1..t_max {
        let pivot = q[t_max - t - 1]; // q_{T−t}, 1-based
        let tail = neumaier_sum((t_max - t + 1..=t_max).map(|s| q[s - 1] - pivot));
        corrections.add(tail / (t * (t + 1)) as f64);
    }
    Ok((lhs, mean + corrections.value()))
}

/// Weight 1/(t(t+1)) applied to the tail correction at offset t.
pub fn correction_weight(t: usize) -> f64 {
    1.0 / (t * (t + 1)) as f64
}

/// One inexact-descent risk step: the residual of
///
/// L(v_t) − L(w) ≤ (‖v_{t−1}−w‖² − ‖v_t−w‖²)/(2γ)
///                 + ⟨∇L(v_{t−1}) − ∇L̂(v_{t−1}), v_t − w⟩
///
/// computed as lhs − rhs. Nonpositive (up to oracle noise) whenever
/// γ ≤ 1/(κ²M). Requires 1 ≤ t ≤ T.
pub fn risk_step_residual(
    oracle: &PopulationOracle,
    path: &DescentPath,
    t: usize,
    w: &[f64],
) -> Result<f64> {
    if t == 0 || t > path.iterations() {
        return Err(Error::InvalidParameter(format!(
            "step index {t} outside 1..={}",
            path.iterations()
        )));
    }
    let gamma = path.gamma();
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter("step size must be positive".into()));
    }
    let prev = path.iterate(t - 1);
    let curr = path.iterate(t);
    let lhs = oracle.risk(curr)?.value - oracle.risk(w)?.value;
    let pop_grad = oracle.gradient(prev)?;
    let noise = sub(&pop_grad, path.gradient(t - 1));
    let rhs = (dist(prev, w).powi(2) - dist(curr, w).powi(2)) / (2.0 * gamma)
        + dot(&noise, &sub(curr, w));
    Ok(lhs - rhs)
}

/// Residual of the recursive path bound at step t:
///
/// ‖v_{t+1}−w*‖² ≤ ‖v₀−w*‖² + 2γ Σ_{s=0}^{t} (⟨∇L(v_s)−∇L̂(v_s), v_s−w*⟩
///                                            + κL‖∇L(v_s)−∇L̂(v_s)‖)
///
/// computed as lhs − rhs for one t. [`path_recursion_residuals`] evaluates
/// all steps sharing the cumulative sum.
pub fn path_recursion_residual(
    oracle: &PopulationOracle,
    path: &DescentPath,
    t: usize,
    kappa: f64,
) -> Result<f64> {
    let all = path_recursion_residuals(oracle, path, kappa)?;
    all.get(t)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("step index {t} outside 0..{}", all.len())))
}

/// Residuals of the recursive path bound for every t in 0..T.
pub fn path_recursion_residuals(
    oracle: &PopulationOracle,
    path: &DescentPath,
    kappa: f64,
) -> Result<Vec<f64>> {
    let w_star = oracle.w_star().to_vec();
    let gamma = path.gamma();
    let base = dist(path.iterate(0), &w_star).powi(2);
    let loss_lip = oracle.loss().lipschitz();
    let mut cumulative = CompensatedSum::new();
    let mut residuals = Vec::with_capacity(path.iterations());
    for t in 0..path.iterations() {
        let v = path.iterate(t);
        let pop_grad = oracle.gradient(v)?;
        let noise = sub(&pop_grad, path.gradient(t));
        cumulative.add(dot(&noise, &sub(v, &w_star)) + kappa * loss_lip * norm(&noise));
        let lhs = dist(path.iterate(t + 1), &w_star).powi(2);
        residuals.push(lhs - (base + 2.0 * gamma * cumulative.value()));
    }
    Ok(residuals)
}

/// The assembled decomposition of the excess risk at a comparison point w.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// ‖v₀ − w‖² / (2γT).
    pub bias_term: f64,
    /// ⟨∇L(v_{t−1}) − ∇L̂(v_{t−1}), v_t − w⟩ for t = 1..=T.
    pub variance_terms: Vec<f64>,
    /// Weighted last-iterate corrections
    /// 1/(t(t+1))·⟨∇L(v_{s−1}) − ∇L̂(v_{s−1}), v_s − v_{T−t}⟩,
    /// flattened over t = 1..T−1, s = T−t+1..=T.
    pub last_iterate_corrections: Vec<f64>,
    /// Measured L(v̄_T) − L(w).
    pub lhs_avg: f64,
    /// Measured L(v_T) − L(w).
    pub lhs_last: f64,
    /// bias_term + mean(variance_terms).
    pub rhs_avg: f64,
    /// rhs_avg + Σ last_iterate_corrections.
    pub rhs_last: f64,
    /// (1/T) Σ (L(v_t) − L(w)): the intermediate quantity the averaged
    /// bound dominates and the last-iterate identity starts from.
    pub mean_iterate_gap: f64,
    /// Whether γ ≤ 1/(κ²M) held for this run; the inequalities are only
    /// claimed when it does.
    pub step_condition_ok: bool,
    /// Total oracle standard error budget for the assembled quantities
    /// (zero for the analytic oracle).
    pub oracle_se: f64,
}

impl DecompositionReport {
    /// lhs_avg − rhs_avg; the averaged-iterate claim is residual ≤ 0.
    pub fn avg_residual(&self) -> f64 {
        self.lhs_avg - self.rhs_avg
    }

    /// lhs_last − rhs_last for the fully assembled right-hand side.
    pub fn last_residual(&self) -> f64 {
        self.lhs_last - self.rhs_last
    }

    /// lhs_last − (mean_iterate_gap + Σ corrections): the tighter form
    /// before the averaged bound is substituted for the mean gap.
    pub fn last_residual_tight(&self) -> f64 {
        let corr = neumaier_sum(self.last_iterate_corrections.iter().copied());
        self.lhs_last - (self.mean_iterate_gap + corr)
    }
}

/// Assemble the full decomposition for a recorded path against a
/// comparison point w (normally w*).
pub fn decompose(
    oracle: &PopulationOracle,
    data: &Dataset,
    path: &DescentPath,
    w: &[f64],
) -> Result<DecompositionReport> {
    let t_max = path.iterations();
    let gamma = path.gamma();
    let loss = oracle.loss();
    let (_, step_condition_ok) = crate::engine::DescentConfig::new(gamma, t_max)
        .step_condition(data.kappa(), loss.smoothness());

    let risk_w = oracle.risk(w)?;
    let mut oracle_se = risk_w.std_error;

    let bias_term = dist(path.iterate(0), w).powi(2) / (2.0 * gamma * t_max as f64);

    // Population gradients along the path, reused by both parts.
    let mut pop_grads = Vec::with_capacity(t_max);
    for t in 0..t_max {
        pop_grads.push(oracle.gradient(path.iterate(t))?);
    }

    let mut variance_terms = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let noise = sub(&pop_grads[t - 1], path.gradient(t - 1));
        variance_terms.push(dot(&noise, &sub(path.iterate(t), w)));
    }

    let mut gaps = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let r = oracle.risk(path.iterate(t))?;
        oracle_se += r.std_error / t_max as f64;
        gaps.push(r.value - risk_w.value);
    }
    let mean_iterate_gap = neumaier_sum(gaps.iter().copied()) / t_max as f64;

    let mut last_iterate_corrections = Vec::new();
    for t in 1..t_max {
        let weight = correction_weight(t);
        let pivot = path.iterate(t_max - t);
        for s in t_max - t + 1..=t_max {
            let noise = sub(&pop_grads[s - 1], path.gradient(s - 1));
            last_iterate_corrections.push(weight * dot(&noise, &sub(path.iterate(s), pivot)));
        }
    }

    let avg_risk = oracle.risk(&path.averaged_iterate())?;
    let last_risk = oracle.risk(path.last_iterate())?;
    oracle_se += avg_risk.std_error + last_risk.std_error;

    let rhs_avg = bias_term + neumaier_sum(variance_terms.iter().copied()) / t_max as f64;
    let rhs_last = rhs_avg + neumaier_sum(last_iterate_corrections.iter().copied());

    Ok(DecompositionReport {
        bias_term,
        variance_terms,
        last_iterate_corrections,
        lhs_avg: avg_risk.value - risk_w.value,
        lhs_last: last_risk.value - risk_w.value,
        rhs_avg,
        rhs_last,
        mean_iterate_gap,
        step_condition_ok,
        oracle_se,
    })
}

/// Per-step decomposition terms and inequality residuals as CSV with
/// columns t, bias_contrib, variance_term, risk_step_residual,
/// path_recursion_residual. The bias contributions are the telescoped
/// increments (‖v_{t−1}−w‖² − ‖v_t−w‖²)/(2γT); they sum to at most the
/// bias term.
pub fn write_step_csv<W: std::io::Write>(
    oracle: &PopulationOracle,
    path: &DescentPath,
    kappa: f64,
    w: &[f64],
    mut out: W,
) -> Result<()> {
    let t_max = path.iterations();
    let gamma = path.gamma();
    let recursion = path_recursion_residuals(oracle, path, kappa)?;
    writeln!(
        out,
        "t,bias_contrib,variance_term,risk_step_residual,path_recursion_residual"
    )?;
    for t in 1..=t_max {
        let bias = (dist(path.iterate(t - 1), w).powi(2) - dist(path.iterate(t), w).powi(2))
            / (2.0 * gamma * t_max as f64);
        let pop = oracle.gradient(path.iterate(t - 1))?;
        let variance = dot(&sub(&pop, path.gradient(t - 1)), &sub(path.iterate(t), w));
        let risk_res = risk_step_residual(oracle, path, t, w)?;
        writeln!(out, "{t},{bias},{variance},{risk_res},{}", recursion[t - 1])?;
    }
    Ok(())
}

/// Path radius R = max{1, 3‖w*‖}.
pub fn path_radius(w_star: &[f64]) -> f64 {
    (3.0 * norm(w_star)).max(1.0)
}

/// Result of checking ‖v_t‖ ≤ R and ‖v_t − w*‖ ≤ 2R/3 along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathContainment {
    pub contained: bool,
    /// First t ≥ 1 at which either inequality fails.
    pub first_violation: Option<usize>,
}

/// Check the path stays inside the radius-R ball and within 2R/3 of w*
/// for all t = 1..=T.
pub fn check_bounded_path(path: &DescentPath, w_star: &[f64], radius: f64) -> PathContainment {
    for t in 1..=path.iterations() {
        let v = path.iterate(t);
        if norm(v) > radius || dist(v, w_star) > 2.0 * radius / 3.0 {
            return PathContainment {
                contained: false,
                first_violation: Some(t),
            };
        }
    }
    PathContainment {
        contained: true,
        first_violation: None,
    }
}

/// The sample-size condition √n ≥ max{1, 90γTκ²(1+κL)(M+L)}·√log(4/δ).
pub fn sample_size_condition(
    n: usize,
    gamma_t: f64,
    kappa: f64,
    lipschitz: f64,
    smoothness: f64,
    delta: f64,
) -> bool {
    let scale = 90.0
        * gamma_t
        * kappa
        * kappa
        * (1.0 + kappa * lipschitz)
        * (smoothness + lipschitz);
    (n as f64).sqrt() >= scale.max(1.0) * (4.0 / delta).ln().sqrt()
}

/// The γT value balancing bias and concentration:
/// √n / (90κ²(1+κL)(M+L)√log(4/δ)).
pub fn schedule_gamma_t(
    n: usize,
    kappa: f64,
    lipschitz: f64,
    smoothness: f64,
    delta: f64,
) -> f64 {
    (n as f64).sqrt()
        / (90.0
            * kappa
            * kappa
            * (1.0 + kappa * lipschitz)
            * (smoothness + lipschitz)
            * (4.0 / delta).ln().sqrt())
}

/// High-probability excess-risk bounds for the averaged and last iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessRiskBounds {
    /// ‖w*‖²/(2γT) + 180·max{1, ‖w*‖²}·κ²(M+L)·√(log(4/δ)/n).
    pub avg_bound: f64,
    /// ‖w*‖²/(2γT) + 425·max{1, ‖w*‖²}·κ²(M+L)·log(T)·√(log(4/δ)/n).
    pub last_bound: f64,
    /// 225·max{1, ‖w*‖²}·κ²(1+κL)(M+L)·√(log(4/δ)/n): the averaged bound
    /// with γT substituted by its schedule value.
    pub avg_bound_scheduled: f64,
    /// Same with constant 470 and the log(T) factor for the last iterate.
    pub last_bound_scheduled: f64,
}

/// Evaluate the excess-risk bounds. `iterations` is accepted as a float so
/// schedule-derived non-integer products can be probed; the bounds require
/// T ≥ 3.
#[allow(clippy::too_many_arguments)]
pub fn excess_risk_bounds(
    n: usize,
    gamma_t: f64,
    iterations: f64,
    delta: f64,
    w_star: &[f64],
    kappa: f64,
    lipschitz: f64,
    smoothness: f64,
) -> ExcessRiskBounds {
    let w_norm_sq = norm_sq(w_star);
    let peak = w_norm_sq.max(1.0);
    let root = ((4.0 / delta).ln() / n as f64).sqrt();
    let bias = w_norm_sq / (2.0 * gamma_t);
    let base = kappa * kappa * (smoothness + lipschitz);
    let sched = base * (1.0 + kappa * lipschitz);
    ExcessRiskBounds {
        avg_bound: bias + 180.0 * peak * base * root,
        last_bound: bias + 425.0 * peak * base * iterations.ln() * root,
        avg_bound_scheduled: 225.0 * peak * sched * root,
        last_bound_scheduled: 470.0 * peak * sched * iterations.ln() * root,
    }
}

/// Theoretical quantities next to their measured counterparts for one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub path_radius: f64,
    pub n_condition_ok: bool,
    pub gamma_t: f64,
    pub gamma_t_schedule: f64,
    pub step_condition_ok: bool,
    pub bounds: ExcessRiskBounds,
    /// Simplified gradient-concentration bound 20κ²R(L+M)√(log(4/δ)/n).
    pub concentration_bound: f64,
    pub measured: Option<MeasuredQuantities>,
}

/// Observed counterparts for a [`BoundReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasuredQuantities {
    pub excess_risk_avg: f64,
    pub excess_risk_last: f64,
    pub sup_gradient_noise: f64,
    pub path_contained: bool,
    pub first_violation: Option<usize>,
}

impl BoundReport {
    /// Assemble the closed-form side of a report.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        loss: &LossModel,
        w_star: &[f64],
        n: usize,
        gamma: f64,
        iterations: usize,
        kappa: f64,
        delta: f64,
    ) -> Self {
        let gamma_t = gamma * iterations as f64;
        let (l, m) = (loss.lipschitz(), loss.smoothness());
        let radius = path_radius(w_star);
        let bounds = excess_risk_bounds(
            n,
            gamma_t,
            iterations as f64,
            delta,
            w_star,
            kappa,
            l,
            m,
        );
        let (_, step_condition_ok) =
            crate::engine::DescentConfig::new(gamma, iterations).step_condition(kappa, m);
        BoundReport {
            path_radius: radius,
            n_condition_ok: sample_size_condition(n, gamma_t, kappa, l, m, delta),
            gamma_t,
            gamma_t_schedule: schedule_gamma_t(n, kappa, l, m, delta),
            step_condition_ok,
            bounds,
            concentration_bound: crate::concentration::concentration_bound(
                kappa, l, m, radius, n, delta,
            )
            .simplified,
            measured: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_on_constant_and_hand_enumerated_sequences() {
        let (lhs, rhs) = last_iterate_identity(&[3.5; 17]).unwrap();
        assert_eq!(lhs, 3.5);
        assert!((rhs - 3.5).abs() < 1e-14);

        // q = (1, 2, 3): mean 2, t=1 tail (3−2)/2, t=2 tail (2−1+3−1)/6.
        let (lhs, rhs) = last_iterate_identity(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(lhs, 3.0);
        assert!((rhs - 3.0).abs() < 1e-14);
        assert!(last_iterate_identity(&[]).is_err());
    }

    #[test]
    fn identity_exact_on_random_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let t: usize = rng.random_range(1..=50);
            let q: Vec<f64> = (0..t).map(|_| rng.random_range(-1e3..1e3)).collect();
            let (lhs, rhs) = last_iterate_identity(&q).unwrap();
            worst = worst.max((lhs - rhs).abs());
        }
        assert!(worst <= 1e-10, "worst deviation {worst}");
    }

    #[test]
    fn correction_weights_for_three_steps() {
        assert_eq!(correction_weight(1), 0.5);
        assert!((correction_weight(2) - 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn radius_formula() {
        assert_eq!(path_radius(&[0.2]), 1.0);
        assert_eq!(path_radius(&[1.0]), 3.0);
        let w = crate::data::make_paper_model(100).unwrap().w_star().to_vec();
        assert!((path_radius(&w) - 3.0 * 1.082323f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn containment_flags_first_violation() {
        use crate::data::Dataset;
        use crate::engine::{run, DescentConfig};
        use crate::losses::{LossKind, LossModel};
        // γ = 0: the path sits at v₀ = 0 forever.
        let loss = LossModel::new(LossKind::Squared { label_bound: 1.0 }, 1.0, 1.0).unwrap();
        let data = Dataset::new(vec![vec![1.0]], vec![1.0]).unwrap();
        let path = run(&loss, &data, &DescentConfig::new(0.0, 5)).unwrap();
        // w* = 0: trivially contained.
        let ok = check_bounded_path(&path, &[0.0], 1.0);
        assert!(ok.contained);
        // w* far away: violated at the first step.
        let bad = check_bounded_path(&path, &[10.0], 1.0);
        assert_eq!(bad.first_violation, Some(1));
    }

    #[test]
    fn sample_size_condition_round_numbers() {
        let delta = 4.0 / std::f64::consts::E; // log(4/δ) = 1
        assert!(sample_size_condition(810_000, 2.5, 1.0, 1.0, 1.0, delta));
        assert!(!sample_size_condition(809_999, 2.5, 1.0, 1.0, 1.0, delta));
        // Tiny γT: the max clamps at 1 and any n ≥ log(4/δ) passes.
        assert!(sample_size_condition(1, 1e-12, 1.0, 1.0, 1.0, delta));
    }

    #[test]
    fn schedule_round_numbers_and_scaling() {
        let delta = 4.0 / std::f64::consts::E;
        let s = schedule_gamma_t(810_000, 1.0, 1.0, 1.0, delta);
        assert!((s - 2.5).abs() < 1e-12);
        let s4 = schedule_gamma_t(4 * 810_000, 1.0, 1.0, 1.0, delta);
        assert!((s4 - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bound_formulas_round_numbers() {
        let delta = 4.0 / std::f64::consts::E;
        // ‖w*‖ = 1, γT = 10, κ = 1, M + L = 2, n = 10⁶.
        let b = excess_risk_bounds(1_000_000, 10.0, 3.0, delta, &[1.0], 1.0, 1.0, 1.0);
        assert!((b.avg_bound - 0.41).abs() < 1e-12);
        // Hypothetical log T = 1: 0.05 + 850·0.001.
        let b_e = excess_risk_bounds(
            1_000_000,
            10.0,
            std::f64::consts::E,
            delta,
            &[1.0],
            1.0,
            1.0,
            1.0,
        );
        assert!((b_e.last_bound - 0.90).abs() < 1e-12);
    }

    #[test]
    fn bounds_monotone_in_n_and_delta() {
        let b = |n: usize, delta: f64| {
            excess_risk_bounds(n, 5.0, 10.0, delta, &[1.0], 1.0, 1.0, 1.0).avg_bound
        };
        assert!(b(10_000, 0.05) > b(40_000, 0.05));
        assert!(b(10_000, 0.01) > b(10_000, 0.1));
    }

    #[test]
    fn last_constant_exceeds_avg_constant_from_three_iterations() {
        for t in 3..50 {
            assert!(425.0 * (t as f64).ln() > 180.0, "T = {t}");
        }
    }

    #[test]
    fn step_csv_matches_the_decomposition() {
        use crate::data::make_paper_model;
        use crate::engine::{run, DescentConfig};
        use crate::losses::{LossKind, LossModel};
        use crate::oracle::PopulationOracle;
        let model = make_paper_model(6).unwrap();
        let data = model.sample(150, 8).unwrap();
        let loss = LossModel::new(
            LossKind::Squared { label_bound: data.max_abs_label().max(1.0) },
            data.kappa(),
            path_radius(model.w_star()),
        )
        .unwrap();
        let gamma = 1.0 / (2.0 * data.kappa() * data.kappa());
        let oracle = PopulationOracle::analytic_squared(model, loss).unwrap();
        let path = run(&loss, &data, &DescentConfig::new(gamma, 12)).unwrap();
        let w = oracle.w_star().to_vec();
        let mut buf = Vec::new();
        write_step_csv(&oracle, &path, data.kappa(), &w, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,bias_contrib,variance_term,risk_step_residual,path_recursion_residual"
        );
        let report = crate::analysis::decompose(&oracle, &data, &path, &w).unwrap();
        let mut bias_sum = 0.0;
        for (i, line) in lines.enumerate() {
            let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
            assert_eq!(fields[0] as usize, i + 1);
            bias_sum += fields[1];
            assert!((fields[2] - report.variance_terms[i]).abs() <= 1e-14);
            assert!(fields[3] <= 1e-8);
            assert!(fields[4] <= 1e-8);
        }
        assert!(bias_sum <= report.bias_term + 1e-12);
    }
}
