//! Population-risk quantities: L(w), ∇L(w), the minimizer w*, excess
//! risk and gradient noise.
//!
//! Two modes. For the squared loss under the Gaussian synthetic model the
//! population risk has the closed form (w − w*)ᵀΣ(w − w*) + noise_sd² and
//! everything is exact. For every other loss a Monte-Carlo oracle averages
//! over a fresh holdout sample (disjoint from training data by seed) and
//! reports standard errors alongside every estimate, so theory checks can
//! separate genuine violations from estimator noise.
//!
//! The minimizer: for the squared loss it is the generating vector; for
//! the regression logistic loss the generating vector as well, because
//! that loss is an even function of y − a and the model noise is
//! symmetric. For the remaining losses no closed form exists and w* is
//! located by long small-step descent on the holdout risk — callers can
//! see via [`PopulationOracle::w_star_is_approximate`] that such a w* is
//! a surrogate.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LabelRule, SyntheticModel};
use crate::engine::{empirical_gradient_unchecked, validate_labels};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, mean_and_se, norm, sub};
use crate::losses::{LossKind, LossModel};

/// A scalar estimate with its standard error (zero in analytic mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Excess risk L(w) − L(w*). `value` is clamped to zero when a negative
/// raw estimate is within estimator noise; `raw` never is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessRisk {
    pub value: f64,
    pub raw: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
enum Mode {
    AnalyticSquared { model: SyntheticModel },
    MonteCarlo { holdout: Dataset, seed: Option<u64> },
}

/// Evaluator of the population risk, its gradient and its minimizer.
#[derive(Debug, Clone)]
pub struct PopulationOracle {
    loss: LossModel,
    mode: Mode,
    w_star: Vec<f64>,
    w_star_approximate: bool,
    risk_at_min: RiskEstimate,
}

/// Serializable description of an oracle for run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub mode: String,
    pub holdout_size: Option<usize>,
    pub seed: Option<u64>,
    pub w_star: Vec<f64>,
    pub w_star_approximate: bool,
    pub risk_at_min: RiskEstimate,
}

impl PopulationOracle {
    /// Exact oracle for the squared loss under the Gaussian model.
    pub fn analytic_squared(model: SyntheticModel, loss: LossModel) -> Result<Self> {
        if !matches!(loss.kind(), LossKind::Squared { .. }) {
            return Err(Error::OracleMismatch(format!(
                "analytic mode requires the squared loss, got {}",
                loss.kind().name()
            )));
        }
        let w_star = model.w_star().to_vec();
        let risk_at_min = RiskEstimate {
            value: model.noise_sd * model.noise_sd,
            std_error: 0.0,
        };
        Ok(Self {
            loss,
            mode: Mode::AnalyticSquared { model },
            w_star,
            w_star_approximate: false,
            risk_at_min,
        })
    }

    /// Monte-Carlo oracle over a fresh holdout of `m` draws from the model.
    pub fn monte_carlo(
        model: &SyntheticModel,
        loss: LossModel,
        m: usize,
        seed: u64,
        labels: LabelRule,
    ) -> Result<Self> {
        let holdout = model.sample_with(m, seed, labels, None)?;
        let known_minimizer = match (loss.kind(), labels) {
            // Squared loss: risk is the quadratic form, minimized at the
            // generating vector regardless of which sample estimates it.
            (LossKind::Squared { .. }, LabelRule::Linear) => Some(model.w_star().to_vec()),
            // Even in y − a, symmetric noise: generating vector again.
            (LossKind::LogisticRegression, LabelRule::Linear) => Some(model.w_star().to_vec()),
            _ => None,
        };
        Self::from_holdout(loss, holdout, known_minimizer, Some(seed))
    }

    /// Monte-Carlo oracle over an explicit dataset. Passing the training
    /// set itself makes empirical and "population" quantities coincide,
    /// which is useful for zero-noise tests.
    pub fn monte_carlo_from_dataset(
        loss: LossModel,
        holdout: Dataset,
        w_star: Option<Vec<f64>>,
    ) -> Result<Self> {
        Self::from_holdout(loss, holdout, w_star, None)
    }

    fn from_holdout(
        loss: LossModel,
        holdout: Dataset,
        known_minimizer: Option<Vec<f64>>,
        seed: Option<u64>,
    ) -> Result<Self> {
        validate_labels(&loss, &holdout)?;
        let (w_star, approximate) = match known_minimizer {
            Some(w) => {
                if w.len() != holdout.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: holdout.dim(),
                        got: w.len(),
                    });
                }
                (w, false)
            }
            None => (locate_minimizer(&loss, &holdout)?, true),
        };
        let mut oracle = Self {
            loss,
            mode: Mode::MonteCarlo { holdout, seed },
            w_star,
            w_star_approximate: approximate,
            risk_at_min: RiskEstimate {
                value: 0.0,
                std_error: 0.0,
            },
        };
        oracle.risk_at_min = oracle.risk(&oracle.w_star.clone())?;
        Ok(oracle)
    }

    pub fn loss(&self) -> &LossModel {
        &self.loss
    }

    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }

    /// True when w* was located by descent rather than known in closed
    /// form; its quality is then limited by the holdout sample.
    pub fn w_star_is_approximate(&self) -> bool {
        self.w_star_approximate
    }

    pub fn risk_at_min(&self) -> RiskEstimate {
        self.risk_at_min
    }

    pub fn dim(&self) -> usize {
        self.w_star.len()
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.mode, Mode::AnalyticSquared { .. })
    }

    pub fn summary(&self) -> OracleSummary {
        let (mode, holdout_size, seed) = match &self.mode {
            Mode::AnalyticSquared { .. } => ("analytic_squared".to_string(), None, None),
            Mode::MonteCarlo { holdout, seed } => {
                ("monte_carlo".to_string(), Some(holdout.n()), *seed)
            }
        };
        OracleSummary {
            mode,
            holdout_size,
            seed,
            w_star: self.w_star.clone(),
            w_star_approximate: self.w_star_approximate,
            risk_at_min: self.risk_at_min,
        }
    }

    fn check_dim(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Population risk L(w), with standard error in Monte-Carlo mode.
    pub fn risk(&self, w: &[f64]) -> Result<RiskEstimate> {
        self.check_dim(w)?;
        match &self.mode {
            Mode::AnalyticSquared { model } => Ok(RiskEstimate {
                value: model.squared_population_risk(w),
                std_error: 0.0,
            }),
            Mode::MonteCarlo { holdout, .. } => {
                let values: Vec<f64> = (0..holdout.n())
                    .map(|j| {
                        self.loss
                            .value_unchecked(holdout.y(j), dot(holdout.x(j), w))
                    })
                    .collect();
                let (value, std_error) = mean_and_se(&values);
                Ok(RiskEstimate { value, std_error })
            }
        }
    }

    /// Population gradient ∇L(w).
    pub fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        match &self.mode {
            Mode::AnalyticSquared { model } => Ok(model.squared_population_gradient(w)),
            Mode::MonteCarlo { holdout, .. } => {
                Ok(empirical_gradient_unchecked(&self.loss, holdout, w))
            }
        }
    }

    /// Population gradient together with the standard error of its norm,
    /// √(Σ_i var_i / m). Zero in analytic mode.
    pub fn gradient_with_se(&self, w: &[f64]) -> Result<(Vec<f64>, f64)> {
        let grad = self.gradient(w)?;
        match &self.mode {
            Mode::AnalyticSquared { .. } => Ok((grad, 0.0)),
            Mode::MonteCarlo { holdout, .. } => {
                let m = holdout.n() as f64;
                let mut var_sum = 0.0;
                for j in 0..holdout.n() {
                    let slope = self
                        .loss
                        .derivative_unchecked(holdout.y(j), dot(holdout.x(j), w));
                    for (i, xi) in holdout.x(j).iter().enumerate() {
                        let dev = slope * xi - grad[i];
                        var_sum += dev * dev;
                    }
                }
                let se = (var_sum / (m - 1.0) / m).sqrt();
                Ok((grad, se))
            }
        }
    }

    /// Excess risk L(w) − L(w*).
    pub fn excess_risk(&self, w: &[f64]) -> Result<ExcessRisk> {
        self.check_dim(w)?;
        match &self.mode {
            Mode::AnalyticSquared { model } => {
                let raw = model.squared_population_risk(w) - model.noise_sd * model.noise_sd;
                Ok(ExcessRisk {
                    value: raw,
                    raw,
                    std_error: 0.0,
                })
            }
            Mode::MonteCarlo { holdout, .. } => {
                // Paired differences over the shared holdout: the common
                // noise in L(w) and L(w*) cancels in the standard error.
                let diffs: Vec<f64> = (0..holdout.n())
                    .map(|j| {
                        let a = dot(holdout.x(j), w);
                        let b = dot(holdout.x(j), &self.w_star);
                        self.loss.value_unchecked(holdout.y(j), a)
                            - self.loss.value_unchecked(holdout.y(j), b)
                    })
                    .collect();
                let (raw, std_error) = mean_and_se(&diffs);
                let value = if raw < 0.0 && raw >= -3.0 * std_error {
                    0.0
                } else {
                    raw
                };
                Ok(ExcessRisk {
                    value,
                    raw,
                    std_error,
                })
            }
        }
    }

    /// Gradient noise e = ∇L̂(w) − ∇L(w) for a training set.
    pub fn gradient_noise(&self, data: &Dataset, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        let empirical = crate::engine::empirical_gradient(&self.loss, data, w)?;
        let population = self.gradient(w)?;
        Ok(sub(&empirical, &population))
    }
}

/// Locate the risk minimizer by small-step descent until the gradient
/// norm falls below 1e-6.
fn locate_minimizer(loss: &LossModel, holdout: &Dataset) -> Result<Vec<f64>> {
    let gamma = (1.0 / (holdout.kappa() * holdout.kappa() * loss.smoothness())).min(1.0);
    let mut w = vec![0.0; holdout.dim()];
    let max_iters = 200_000;
    for _ in 0..max_iters {
        let grad = empirical_gradient_unchecked(loss, holdout, &w);
        if norm(&grad) <= 1e-6 {
            return Ok(w);
        }
        axpy(-gamma, &grad, &mut w);
    }
    let grad = empirical_gradient_unchecked(loss, holdout, &w);
    if norm(&grad) <= 1e-6 {
        Ok(w)
    } else {
        Err(Error::InvalidParameter(format!(
            "minimizer search stalled at gradient norm {:.3e}",
            norm(&grad)
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::make_paper_model;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn squared_loss(kappa: f64) -> LossModel {
        LossModel::new(LossKind::Squared { label_bound: 8.0 }, kappa, 4.0).unwrap()
    }

    fn unit_vec(d: usize, i: usize) -> Vec<f64> {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    }

    #[test]
    fn analytic_risk_at_and_near_minimizer() {
        let model = make_paper_model(10).unwrap();
        let oracle =
            PopulationOracle::analytic_squared(model.clone(), squared_loss(2.0)).unwrap();
        // At w*: only the noise variance remains.
        let at_min = oracle.risk(oracle.w_star()).unwrap();
        assert_eq!(at_min.value, 1.0);
        // One unit along e₁ (Σ₁₁ = 1): risk 1 + 1, excess 1.
        let mut w = oracle.w_star().to_vec();
        w[0] += 1.0;
        assert!((oracle.risk(&w).unwrap().value - 2.0).abs() < 1e-14);
        assert!((oracle.excess_risk(&w).unwrap().value - 1.0).abs() < 1e-14);
        assert_eq!(oracle.excess_risk(oracle.w_star()).unwrap().value, 0.0);
    }

    #[test]
    fn analytic_gradient_closed_form() {
        let model = make_paper_model(5).unwrap();
        let oracle =
            PopulationOracle::analytic_squared(model.clone(), squared_loss(2.0)).unwrap();
        let g0 = oracle.gradient(oracle.w_star()).unwrap();
        assert!(norm(&g0) <= 1e-12);
        let mut w = oracle.w_star().to_vec();
        w[0] += 1.0;
        let g = oracle.gradient(&w).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-14);
        for gi in &g[1..] {
            assert_eq!(*gi, 0.0);
        }
    }

    #[test]
    fn analytic_mode_rejects_other_losses() {
        let model = make_paper_model(5).unwrap();
        let logistic = LossModel::new(LossKind::LogisticRegression, 2.0, 4.0).unwrap();
        assert!(PopulationOracle::analytic_squared(model, logistic).is_err());
    }

    #[test]
    fn monte_carlo_agrees_with_analytic_within_three_se() {
        let model = make_paper_model(20).unwrap();
        let loss = squared_loss(4.0);
        let analytic = PopulationOracle::analytic_squared(model.clone(), loss).unwrap();
        let mc =
            PopulationOracle::monte_carlo(&model, loss, 100_000, 901, LabelRule::Linear).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..5 {
            let w: Vec<f64> = (0..20).map(|_| rng.random_range(-0.5..0.5)).collect();
            let exact = analytic.risk(&w).unwrap().value;
            let est = mc.risk(&w).unwrap();
            assert!(
                (est.value - exact).abs() <= 3.0 * est.std_error,
                "risk {} vs {} (se {})",
                est.value,
                exact,
                est.std_error
            );
            let g_exact = analytic.gradient(&w).unwrap();
            let (g_est, g_se) = mc.gradient_with_se(&w).unwrap();
            let gap = crate::linalg::dist(&g_exact, &g_est);
            assert!(gap <= 3.0 * g_se, "gradient gap {gap} vs 3·se {}", 3.0 * g_se);
        }
    }

    #[test]
    fn shared_sample_noise_is_exactly_zero() {
        let model = make_paper_model(8).unwrap();
        let loss = squared_loss(4.0);
        let data = model.sample(400, 5).unwrap();
        let oracle = PopulationOracle::monte_carlo_from_dataset(
            loss,
            data.clone(),
            Some(model.w_star().to_vec()),
        )
        .unwrap();
        let w = unit_vec(8, 2);
        let e = oracle.gradient_noise(&data, &w).unwrap();
        assert!(e.iter().all(|&x| x == 0.0), "noise {e:?}");
    }

    #[test]
    fn logistic_regression_minimizer_is_generating_vector() {
        // The loss is even in y − a and the noise symmetric, so the
        // generating vector minimizes; perturbations only increase risk.
        let model = make_paper_model(10).unwrap();
        let loss = LossModel::new(LossKind::LogisticRegression, 4.0, 4.0).unwrap();
        let oracle =
            PopulationOracle::monte_carlo(&model, loss, 60_000, 31, LabelRule::Linear).unwrap();
        assert!(!oracle.w_star_is_approximate());
        assert_eq!(oracle.w_star(), model.w_star());
        let base = oracle.risk(oracle.w_star()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let mut w = oracle.w_star().to_vec();
            for wi in w.iter_mut() {
                *wi += rng.random_range(-0.3..0.3);
            }
            let r = oracle.risk(&w).unwrap();
            assert!(
                base.value <= r.value + 3.0 * (base.std_error + r.std_error),
                "perturbation did better: {} vs {}",
                base.value,
                r.value
            );
        }
        let (g, se) = oracle.gradient_with_se(oracle.w_star()).unwrap();
        assert!(norm(&g) <= 3.0 * se, "stationarity: {} vs {}", norm(&g), se);
    }

    #[test]
    fn located_minimizer_is_stationary() {
        let model = make_paper_model(3).unwrap();
        let loss = LossModel::new(LossKind::LogisticClassification, 4.0, 4.0).unwrap();
        let oracle =
            PopulationOracle::monte_carlo(&model, loss, 4000, 13, LabelRule::SignOfLinear)
                .unwrap();
        assert!(oracle.w_star_is_approximate());
        let g = oracle.gradient(oracle.w_star()).unwrap();
        assert!(norm(&g) <= 1e-6);
        assert_eq!(oracle.excess_risk(oracle.w_star()).unwrap().value, 0.0);
    }

    #[test]
    fn excess_risk_never_significantly_negative() {
        let model = make_paper_model(6).unwrap();
        let loss = LossModel::new(LossKind::LogisticRegression, 4.0, 4.0).unwrap();
        let oracle =
            PopulationOracle::monte_carlo(&model, loss, 20_000, 3, LabelRule::Linear).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let w: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let er = oracle.excess_risk(&w).unwrap();
            assert!(er.raw >= -3.0 * er.std_error, "raw {} se {}", er.raw, er.std_error);
            assert!(er.value >= 0.0 || er.raw < -3.0 * er.std_error);
        }
    }

    #[test]
    fn risk_properties_transfer_from_loss() {
        // Convexity, κL-Lipschitz risk, κ²M-Lipschitz gradient, all up to
        // three standard errors over the holdout.
        let model = make_paper_model(6).unwrap();
        let loss = LossModel::new(LossKind::LogisticRegression, 4.0, 4.0).unwrap();
        let oracle =
            PopulationOracle::monte_carlo(&model, loss, 20_000, 19, LabelRule::Linear).unwrap();
        let kappa = match &oracle.mode {
            Mode::MonteCarlo { holdout, .. } => holdout.kappa(),
            _ => unreachable!(),
        };
        let (l, m) = (loss.lipschitz(), loss.smoothness());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lam: f64 = rng.random_range(0.0..1.0);
            let mid: Vec<f64> = v
                .iter()
                .zip(&w)
                .map(|(a, b)| lam * a + (1.0 - lam) * b)
                .collect();
            let rv = oracle.risk(&v).unwrap();
            let rw = oracle.risk(&w).unwrap();
            let rm = oracle.risk(&mid).unwrap();
            let se = rv.std_error + rw.std_error + rm.std_error;
            assert!(
                rm.value <= lam * rv.value + (1.0 - lam) * rw.value + 3.0 * se,
                "segment convexity"
            );
            let gap = crate::linalg::dist(&v, &w);
            assert!(
                (rv.value - rw.value).abs() <= kappa * l * gap + 3.0 * se,
                "risk Lipschitz"
            );
            let gv = oracle.gradient(&v).unwrap();
            let gw = oracle.gradient(&w).unwrap();
            assert!(
                crate::linalg::dist(&gv, &gw) <= kappa * kappa * m * gap + 1e-12,
                "gradient Lipschitz"
            );
        }
    }
}
