//! Batch gradient descent on the empirical risk.
//!
//! The iteration is v_{t+1} = v_t − γ·∇L̂(v_t) with a constant step size
//! and no projection or clipping of any kind — regularization comes only
//! from the step size and the stopping time. [`run`] records the full
//! iterate and gradient path; [`run_streaming`] keeps O(d) state for long
//! sweeps where only running averages and per-step scalars are needed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dist, dot, norm};
use crate::losses::LossModel;

/// Iterates whose norm passes this are treated as diverged rather than
/// being allowed to cascade into NaNs.
const DIVERGENCE_GUARD: f64 = 1e12;

/// Constant-step-size descent configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    /// Step size γ > 0. Whether γ ≤ min{1/(κ²M), 1} holds is checked by
    /// the analysis layer, not enforced here.
    pub gamma: f64,
    /// Number of iterations T ≥ 1.
    pub iterations: usize,
    /// Starting point; zero vector if None.
    pub start: Option<Vec<f64>>,
}

impl DescentConfig {
    pub fn new(gamma: f64, iterations: usize) -> Self {
        Self {
            gamma,
            iterations,
            start: None,
        }
    }

    fn validate(&self, dim: usize) -> Result<Vec<f64>> {
        if self.gamma < 0.0 || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size must be finite and nonnegative, got {}",
                self.gamma
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iteration count must be at least 1".into()));
        }
        match &self.start {
            None => Ok(vec![0.0; dim]),
            Some(v) if v.len() == dim => Ok(v.clone()),
            Some(v) => Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            }),
        }
    }

    /// The effective step-size bound min{1/(κ²M), 1} and whether γ meets it.
    pub fn step_condition(&self, kappa: f64, smoothness: f64) -> (f64, bool) {
        let bound = (1.0 / (kappa * kappa * smoothness)).min(1.0);
        (bound, self.gamma <= bound)
    }
}

/// Empirical risk L̂(w) = (1/n) Σ ℓ(y_j, ⟨x_j, w⟩).
pub fn empirical_risk(loss: &LossModel, data: &Dataset, w: &[f64]) -> Result<f64> {
    check_dims(data, w)?;
    validate_labels(loss, data)?;
    let n = data.n() as f64;
    let mut acc = 0.0;
    for j in 0..data.n() {
        acc += loss.value_unchecked(data.y(j), dot(data.x(j), w));
    }
    Ok(acc / n)
}

/// Empirical gradient ∇L̂(w) = (1/n) Σ ℓ′(y_j, ⟨x_j, w⟩)·x_j.
pub fn empirical_gradient(loss: &LossModel, data: &Dataset, w: &[f64]) -> Result<Vec<f64>> {
    check_dims(data, w)?;
    validate_labels(loss, data)?;
    Ok(empirical_gradient_unchecked(loss, data, w))
}

pub(crate) fn empirical_gradient_unchecked(
    loss: &LossModel,
    data: &Dataset,
    w: &[f64],
) -> Vec<f64> {
    let n = data.n() as f64;
    let mut grad = vec![0.0; w.len()];
    for j in 0..data.n() {
        let slope = loss.derivative_unchecked(data.y(j), dot(data.x(j), w)) / n;
        axpy(slope, data.x(j), &mut grad);
    }
    grad
}

fn check_dims(data: &Dataset, w: &[f64]) -> Result<()> {
    if w.len() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: w.len(),
        });
    }
    Ok(())
}

pub(crate) fn validate_labels(loss: &LossModel, data: &Dataset) -> Result<()> {
    for &y in data.ys() {
        loss.check_label(y)?;
    }
    Ok(())
}

/// Full recording of a descent run: iterates v_0..v_T and the empirical
/// gradients ∇L̂(v_0)..∇L̂(v_{T−1}) they were driven by.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentPath {
    gamma: f64,
    iterates: Vec<Vec<f64>>,
    gradients: Vec<Vec<f64>>,
}

impl DescentPath {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// T, the number of steps taken.
    pub fn iterations(&self) -> usize {
        self.gradients.len()
    }

    pub fn dim(&self) -> usize {
        self.iterates[0].len()
    }

    /// v_t for t in 0..=T.
    pub fn iterate(&self, t: usize) -> &[f64] {
        &self.iterates[t]
    }

    pub fn iterates(&self) -> &[Vec<f64>] {
        &self.iterates
    }

    /// ∇L̂(v_t) for t in 0..T.
    pub fn gradient(&self, t: usize) -> &[f64] {
        &self.gradients[t]
    }

    pub fn gradients(&self) -> &[Vec<f64>] {
        &self.gradients
    }

    /// The averaged iterate v̄_T = (1/T) Σ_{t=1}^T v_t; v_0 is excluded.
    pub fn averaged_iterate(&self) -> Vec<f64> {
        let t = self.iterations();
        let mut avg = vec![0.0; self.dim()];
        for v in &self.iterates[1..] {
            axpy(1.0 / t as f64, v, &mut avg);
        }
        avg
    }

    /// The last iterate v_T.
    pub fn last_iterate(&self) -> &[f64] {
        self.iterates.last().expect("paths are never empty")
    }

    /// Export per-step scalars: t, ‖v_t‖, optionally ‖v_t − w*‖, L̂(v_t).
    pub fn write_csv<W: Write>(
        &self,
        loss: &LossModel,
        data: &Dataset,
        w_star: Option<&[f64]>,
        mut out: W,
    ) -> Result<()> {
        match w_star {
            Some(_) => writeln!(out, "t,iterate_norm,dist_to_minimizer,empirical_risk")?,
            None => writeln!(out, "t,iterate_norm,empirical_risk")?,
        }
        for (t, v) in self.iterates.iter().enumerate() {
            let risk = empirical_risk(loss, data, v)?;
            match w_star {
                Some(ws) => writeln!(out, "{t},{},{},{risk}", norm(v), dist(v, ws))?,
                None => writeln!(out, "{t},{},{risk}", norm(v))?,
            }
        }
        Ok(())
    }
}

/// Run batch gradient descent recording the full path.
pub fn run(loss: &LossModel, data: &Dataset, cfg: &DescentConfig) -> Result<DescentPath> {
    let v0 = cfg.validate(data.dim())?;
    validate_labels(loss, data)?;
    let t_max = cfg.iterations;
    let mut iterates = Vec::with_capacity(t_max + 1);
    let mut gradients = Vec::with_capacity(t_max);
    iterates.push(v0);
    for t in 0..t_max {
        let current = iterates.last().unwrap();
        let grad = empirical_gradient_unchecked(loss, data, current);
        let mut next = current.clone();
        axpy(-cfg.gamma, &grad, &mut next);
        guard_iterate(&next, t + 1)?;
        gradients.push(grad);
        iterates.push(next);
    }
    Ok(DescentPath {
        gamma: cfg.gamma,
        iterates,
        gradients,
    })
}

fn guard_iterate(v: &[f64], t: usize) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteIterate { t });
    }
    let n = norm(v);
    if n > DIVERGENCE_GUARD {
        return Err(Error::DivergedIterate { t, norm: n });
    }
    Ok(())
}

/// What the streaming runner should track besides the running average.
#[derive(Debug, Clone, Default)]
pub struct StreamOptions {
    /// Record ‖v_t − reference‖ for t = 1..=T.
    pub track_dist_to: Option<Vec<f64>>,
    /// Capture the averaged iterate v̄_t at these step counts
    /// (ascending, each ≥ 1, each ≤ T).
    pub snapshot_at: Vec<usize>,
}

/// O(d)-state summary of a descent run.
#[derive(Debug, Clone)]
pub struct StreamSummary {
    pub gamma: f64,
    pub iterations: usize,
    /// v̄_T over the full run.
    pub averaged: Vec<f64>,
    /// v_T.
    pub last: Vec<f64>,
    /// (t, v̄_t) at each requested snapshot.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    /// ‖v_t − reference‖ for t = 1..=T when requested.
    pub dist_trace: Option<Vec<f64>>,
}

/// Run descent without retaining the path. Produces bitwise the same
/// iterates as [`run`] under the same inputs.
pub fn run_streaming(
    loss: &LossModel,
    data: &Dataset,
    cfg: &DescentConfig,
    opts: &StreamOptions,
) -> Result<StreamSummary> {
    let mut v = cfg.validate(data.dim())?;
    validate_labels(loss, data)?;
    if let Some(r) = &opts.track_dist_to {
        if r.len() != data.dim() {
            return Err(Error::DimensionMismatch {
                expected: data.dim(),
                got: r.len(),
            });
        }
    }
    let t_max = cfg.iterations;
    for (i, &s) in opts.snapshot_at.iter().enumerate() {
        if s == 0 || s > t_max || (i > 0 && opts.snapshot_at[i - 1] >= s) {
            return Err(Error::InvalidParameter(format!(
                "snapshots must be ascending in 1..={t_max}"
            )));
        }
    }

    let mut sum = vec![0.0; data.dim()];
    let mut snapshots = Vec::with_capacity(opts.snapshot_at.len());
    let mut dist_trace = opts.track_dist_to.as_ref().map(|_| Vec::with_capacity(t_max));
    let mut next_snapshot = opts.snapshot_at.iter().copied().peekable();

    for t in 1..=t_max {
        let grad = empirical_gradient_unchecked(loss, data, &v);
        axpy(-cfg.gamma, &grad, &mut v);
        guard_iterate(&v, t)?;
        axpy(1.0, &v, &mut sum);
        if let (Some(trace), Some(r)) = (dist_trace.as_mut(), opts.track_dist_to.as_ref()) {
            trace.push(dist(&v, r));
        }
        if next_snapshot.peek() == Some(&t) {
            next_snapshot.next();
            let avg: Vec<f64> = sum.iter().map(|s| s / t as f64).collect();
            snapshots.push((t, avg));
        }
    }

    let averaged: Vec<f64> = sum.iter().map(|s| s / t_max as f64).collect();
    Ok(StreamSummary {
        gamma: cfg.gamma,
        iterations: t_max,
        averaged,
        last: v,
        snapshots,
        dist_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_paper_model, Dataset};
    use crate::losses::{LossKind, LossModel};

    fn single_point() -> (LossModel, Dataset) {
        let loss = LossModel::new(LossKind::Squared { label_bound: 1.0 }, 1.0, 1.0).unwrap();
        let data = Dataset::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        (loss, data)
    }

    #[test]
    fn gradient_single_squared_sample() {
        let (loss, data) = single_point();
        let g = empirical_gradient(&loss, &data, &[0.0, 0.0]).unwrap();
        assert_eq!(g, vec![-2.0, 0.0]);
    }

    #[test]
    fn gradient_single_logistic_sample() {
        let loss = LossModel::new(LossKind::LogisticClassification, 1.0, 1.0).unwrap();
        let data = Dataset::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        let g = empirical_gradient(&loss, &data, &[0.0, 0.0]).unwrap();
        assert!((g[0] + 0.5).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn gradient_matches_finite_difference_of_risk() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for kind in [
            LossKind::Squared { label_bound: 4.0 },
            LossKind::LogisticRegression,
            LossKind::LogisticClassification,
            LossKind::Exponential,
        ] {
            let loss = LossModel::new(kind, 2.0, 2.0).unwrap();
            let classification = matches!(
                kind,
                LossKind::LogisticClassification | LossKind::Exponential
            );
            let n = 5;
            let d = 3;
            let xs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-0.9..0.9)).collect())
                .collect();
            let ys: Vec<f64> = (0..n)
                .map(|_| {
                    if classification {
                        if rng.random::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect();
            let data = Dataset::new(xs, ys).unwrap();
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            let grad = empirical_gradient(&loss, &data, &w).unwrap();
            for i in 0..d {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[i] += h;
                wm[i] -= h;
                let fd = (empirical_risk(&loss, &data, &wp).unwrap()
                    - empirical_risk(&loss, &data, &wm).unwrap())
                    / (2.0 * h);
                assert!(
                    (fd - grad[i]).abs() <= 1e-6 * grad[i].abs().max(1.0),
                    "{}: coord {i}: fd {fd} vs {}",
                    kind.name(),
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn single_step_hand_computation() {
        // ∇L̂(0) = (−2, 0); v_1 = 0 − 0.25·(−2, 0) = (0.5, 0).
        let (loss, data) = single_point();
        let path = run(&loss, &data, &DescentConfig::new(0.25, 1)).unwrap();
        assert_eq!(path.last_iterate(), &[0.5, 0.0]);
    }

    #[test]
    fn zero_step_size_freezes_path() {
        let (loss, data) = single_point();
        let path = run(&loss, &data, &DescentConfig::new(0.0, 5)).unwrap();
        for t in 0..=5 {
            assert_eq!(path.iterate(t), &[0.0, 0.0]);
        }
        assert_eq!(path.last_iterate(), &[0.0, 0.0]);
    }

    #[test]
    fn averaged_iterate_excludes_start() {
        let (loss, data) = single_point();
        // γ = 0.5 on (y−⟨x,v⟩)² with x = e₁: v_{t+1} = v_t − 0.5·2(v_t−1)·e₁,
        // so v₁ = (1, 0), v₂ = (1, 0): hand-checkable average.
        let path = run(&loss, &data, &DescentConfig::new(0.5, 2)).unwrap();
        assert_eq!(path.iterate(1), &[1.0, 0.0]);
        assert_eq!(path.iterate(2), &[1.0, 0.0]);
        assert_eq!(path.averaged_iterate(), vec![1.0, 0.0]);
        // T = 1: the average is v₁ itself.
        let p1 = run(&loss, &data, &DescentConfig::new(0.25, 1)).unwrap();
        assert_eq!(p1.averaged_iterate(), p1.last_iterate().to_vec());
    }

    #[test]
    fn path_reconstructs_from_stored_gradients() {
        let m = make_paper_model(10).unwrap();
        let data = m.sample(100, 21).unwrap();
        let loss = LossModel::new(LossKind::LogisticRegression, data.kappa(), 4.0).unwrap();
        let cfg = DescentConfig::new(0.3, 50);
        let path = run(&loss, &data, &cfg).unwrap();
        // Step identity per coordinate.
        for t in 0..path.iterations() {
            for i in 0..path.dim() {
                let rebuilt = path.iterate(t)[i] - cfg.gamma * path.gradient(t)[i];
                assert!((rebuilt - path.iterate(t + 1)[i]).abs() <= 1e-12);
            }
        }
        // Telescoping to the last iterate.
        let mut v = path.iterate(0).to_vec();
        for g in path.gradients() {
            axpy(-cfg.gamma, g, &mut v);
        }
        for (vi, li) in v.iter().zip(path.last_iterate()) {
            assert!((vi - li).abs() <= 1e-10);
        }
    }

    #[test]
    fn descent_is_monotone_under_step_condition() {
        let m = make_paper_model(10).unwrap();
        let data = m.sample(200, 2).unwrap();
        let loss = LossModel::new(LossKind::Squared { label_bound: data.max_abs_label() },
            data.kappa(), 1.0).unwrap();
        let (bound, ok) = DescentConfig::new(0.0, 1).step_condition(data.kappa(), loss.smoothness());
        assert!(ok);
        let cfg = DescentConfig::new(bound, 100);
        let path = run(&loss, &data, &cfg).unwrap();
        let mut prev = empirical_risk(&loss, &data, path.iterate(0)).unwrap();
        for t in 1..=path.iterations() {
            let risk = empirical_risk(&loss, &data, path.iterate(t)).unwrap();
            assert!(risk <= prev + 1e-10, "risk rose at t={t}");
            prev = risk;
        }
    }

    #[test]
    fn exact_fit_least_squares_converges() {
        // y = ⟨x, w⟩ with full-rank design: the gradient must vanish, and
        // the limit must solve the normal equations computed independently.
        let w_true = [0.7, -0.4, 0.2];
        let m = make_paper_model(3).unwrap();
        let raw = m.sample(12, 5).unwrap();
        let xs: Vec<Vec<f64>> = raw.xs().to_vec();
        let ys: Vec<f64> = xs.iter().map(|x| dot(x, &w_true)).collect();
        let data = Dataset::new(xs, ys).unwrap();
        let loss = LossModel::new(
            LossKind::Squared { label_bound: data.max_abs_label().max(1.0) },
            data.kappa(),
            1.0,
        )
        .unwrap();
        let gamma = 1.0 / (2.0 * data.kappa() * data.kappa());
        let path = run(&loss, &data, &DescentConfig::new(gamma, 4000)).unwrap();
        let grad = empirical_gradient(&loss, &data, path.last_iterate()).unwrap();
        assert!(norm(&grad) <= 1e-6, "gradient norm {}", norm(&grad));
        let solved = crate::testutil::least_squares(data.xs(), data.ys());
        for (got, want) in path.last_iterate().iter().zip(&solved) {
            assert!((got - want).abs() < 1e-5);
        }
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let m = make_paper_model(8).unwrap();
        let data = m.sample(64, 77).unwrap();
        let loss = LossModel::new(LossKind::LogisticRegression, data.kappa(), 4.0).unwrap();
        let cfg = DescentConfig::new(0.5, 40);
        let a = run(&loss, &data, &cfg).unwrap();
        let b = run(&loss, &data, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn divergence_guard_names_the_step() {
        let (loss, data) = single_point();
        // γ = 2 on a quadratic with curvature 2: |1 − γ·2| = 3 per step.
        let err = run(&loss, &data, &DescentConfig::new(2.0, 100)).unwrap_err();
        match err {
            Error::DivergedIterate { t, .. } => assert!(t > 0),
            other => panic!("expected divergence, got {other}"),
        }
    }

    #[test]
    fn path_csv_reports_per_step_scalars() {
        let (loss, data) = single_point();
        let path = run(&loss, &data, &DescentConfig::new(0.25, 2)).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&loss, &data, Some(&[1.0, 0.0]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,iterate_norm,dist_to_minimizer,empirical_risk");
        // v_0 = 0: distance 1, risk 1. v_1 = (0.5, 0): distance 0.5, risk 0.25.
        assert_eq!(lines[1], "0,0,1,1");
        assert_eq!(lines[2], "1,0.5,0.5,0.25");
        assert_eq!(lines.len(), 4);
        let mut buf = Vec::new();
        path.write_csv(&loss, &data, None, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,iterate_norm,empirical_risk"));
    }

    #[test]
    fn streaming_matches_full_run() {
        let m = make_paper_model(6).unwrap();
        let data = m.sample(80, 13).unwrap();
        let loss = LossModel::new(LossKind::LogisticRegression, data.kappa(), 4.0).unwrap();
        let cfg = DescentConfig::new(0.4, 30);
        let path = run(&loss, &data, &cfg).unwrap();
        let w_star = vec![0.0; 6];
        let opts = StreamOptions {
            track_dist_to: Some(w_star.clone()),
            snapshot_at: vec![10, 30],
        };
        let summary = run_streaming(&loss, &data, &cfg, &opts).unwrap();
        assert_eq!(summary.last, path.last_iterate());
        // Snapshot at T equals the full averaged iterate.
        assert_eq!(summary.snapshots[1].1, summary.averaged);
        let avg_full = path.averaged_iterate();
        for (a, b) in summary.averaged.iter().zip(&avg_full) {
            assert!((a - b).abs() < 1e-12);
        }
        // Snapshot at t=10 equals the average over the recorded prefix.
        let mut partial = vec![0.0; 6];
        for t in 1..=10 {
            axpy(0.1, path.iterate(t), &mut partial);
        }
        for (a, b) in summary.snapshots[0].1.iter().zip(&partial) {
            assert!((a - b).abs() < 1e-12);
        }
        let trace = summary.dist_trace.unwrap();
        assert_eq!(trace.len(), 30);
        assert!((trace[29] - norm(path.last_iterate())).abs() < 1e-12);
    }
}
