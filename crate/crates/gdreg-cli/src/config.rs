//! Experiment configuration: a single TOML file, overridable from the
//! command line, resolved into a fully explicit struct that is embedded
//! verbatim in the run manifest.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use gdreg::losses::LossKind;

/// Fully resolved experiment configuration. Every run manifest embeds one
/// of these, and a manifest re-run reuses it verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// "squared" | "logistic_regression" | "logistic_classification"
    /// | "exponential".
    pub loss: String,
    /// Label bound for the squared loss; 0 derives max(1, max |y|) from
    /// each training sample.
    pub label_bound: f64,
    pub d: usize,
    pub n_train: usize,
    /// 0 derives n_train / 3.
    pub n_test: usize,
    /// Step size for the path experiment.
    pub gamma: f64,
    /// Step-size grid for the grid experiment.
    pub gammas: Vec<f64>,
    /// Stopping time for the path experiment.
    pub iterations: usize,
    /// Stopping-time grid for the grid experiment; empty selects
    /// log-spaced defaults (dense at paper scale).
    pub t_grid: Vec<usize>,
    pub repetitions: usize,
    pub delta: f64,
    pub seed: u64,
    /// "auto" | "analytic" | "monte_carlo". Auto picks the analytic
    /// oracle for the squared loss and Monte Carlo otherwise.
    pub oracle: String,
    /// Holdout size for oracle Monte-Carlo estimates in the bounds
    /// command, as a multiple of n_train.
    pub oracle_holdout_factor: usize,
    /// Hard covariate-norm cap (resampling mode); 0 disables.
    pub truncate_kappa: f64,
    /// Restore full-scale experiment parameters.
    pub paper_scale: bool,
    /// Monte-Carlo sign draws for Rademacher estimates.
    pub rademacher_draws: usize,
    /// Sign draws for the gradient-composite class (probing makes each
    /// draw far more expensive than a scalar-class draw).
    pub rademacher_gradient_draws: usize,
    pub probe_sphere_points: usize,
    pub probe_ascent_starts: usize,
    pub noise_probe_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            loss: "logistic_regression".to_string(),
            label_bound: 0.0,
            d: 100,
            n_train: 2000,
            n_test: 0,
            gamma: 1.0,
            gammas: (2..=10).map(|g| g as f64).collect(),
            iterations: 1000,
            t_grid: Vec::new(),
            repetitions: 20,
            delta: 0.05,
            seed: 42,
            oracle: "auto".to_string(),
            oracle_holdout_factor: 10,
            truncate_kappa: 0.0,
            paper_scale: false,
            rademacher_draws: 2000,
            rademacher_gradient_draws: 64,
            probe_sphere_points: 512,
            probe_ascent_starts: 64,
            noise_probe_points: 256,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Switch to the full-scale experiment parameters: more data, more
    /// repetitions, every stopping time in the grid.
    pub fn apply_paper_scale(&mut self) {
        self.paper_scale = true;
        self.n_train = 10_000;
        self.repetitions = 100;
        self.t_grid = (1..=1000).collect();
    }

    pub fn validate(&self) -> Result<()> {
        self.loss_kind()?;
        if self.d == 0 {
            bail!("d must be at least 1");
        }
        if self.n_train == 0 {
            bail!("n_train must be at least 1");
        }
        if self.repetitions == 0 {
            bail!("repetitions must be at least 1");
        }
        if !(0.0 < self.delta && self.delta <= 1.0) {
            bail!("delta must lie in (0, 1], got {}", self.delta);
        }
        if self.gamma < 0.0 {
            bail!("gamma must be nonnegative, got {}", self.gamma);
        }
        if self.iterations == 0 {
            bail!("iterations must be at least 1");
        }
        if self.gammas.is_empty() {
            bail!("gammas grid must be non-empty");
        }
        if !matches!(self.oracle.as_str(), "auto" | "analytic" | "monte_carlo") {
            bail!("oracle must be auto, analytic or monte_carlo, got `{}`", self.oracle);
        }
        if self.oracle == "analytic" && self.loss != "squared" {
            bail!("the analytic oracle exists only for the squared loss");
        }
        Ok(())
    }

    pub fn loss_kind(&self) -> Result<LossKind> {
        let bound = if self.label_bound > 0.0 {
            Some(self.label_bound)
        } else if self.loss == "squared" {
            // Derived per sample later; placeholder keeps parsing strict.
            Some(1.0)
        } else {
            None
        };
        LossKind::from_name(&self.loss, bound)
            .map_err(|e| anyhow::anyhow!("invalid loss config: {e}"))
    }

    /// Loss kind with the label bound taken from a concrete sample when
    /// the config leaves it to be derived.
    pub fn loss_kind_for(&self, data: &gdreg::Dataset) -> Result<LossKind> {
        if self.loss == "squared" && self.label_bound <= 0.0 {
            Ok(LossKind::Squared {
                label_bound: data.max_abs_label().max(1.0),
            })
        } else {
            self.loss_kind()
        }
    }

    pub fn resolved_n_test(&self) -> usize {
        if self.n_test > 0 {
            self.n_test
        } else {
            (self.n_train / 3).max(1)
        }
    }

    /// The grid-experiment stopping times, ascending and deduplicated.
    pub fn resolved_t_grid(&self) -> Vec<usize> {
        let mut grid: Vec<usize> = if !self.t_grid.is_empty() {
            self.t_grid.clone()
        } else {
            // ~30 log-spaced values in 1..=1000 plus the round stopping
            // times used by the constant-γT comparisons.
            let mut g: Vec<usize> = (0..30)
                .map(|i| (10f64.powf(3.0 * i as f64 / 29.0)).round() as usize)
                .collect();
            g.extend([1, 100, 200, 500, 1000]);
            g
        };
        grid.sort_unstable();
        grid.dedup();
        grid.retain(|&t| t >= 1);
        grid
    }

    /// Train/test seeds for one repetition; shared across grid cells so
    /// equal-product comparisons use common random numbers.
    pub fn rep_seeds(&self, rep: u64) -> RepSeeds {
        RepSeeds {
            rep,
            train: gdreg::data::derive_seed(self.seed, 2 * rep),
            test: gdreg::data::derive_seed(self.seed, 2 * rep + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepSeeds {
    pub rep: u64,
    pub train: u64,
    pub test: u64,
}
