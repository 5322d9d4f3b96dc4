//! Convex, Lipschitz, smooth loss functions for linear prediction.
//!
//! A [`LossModel`] bundles a loss ℓ(y, a) — convex, L-Lipschitz and
//! M-smooth in its second argument — together with the constants (L, M)
//! valid on a working interval [−κR, κR]. The four supported losses:
//!
//! * squared: ℓ(y, a) = (y − a)², labels in [−b, b],
//!   L = 2(b + κR), M = 2
//! * logistic (regression): ℓ(y, a) = −log(4·e^{y−a} / (1 + e^{y−a})²),
//!   labels real, L = 1, M = 1
//! * logistic (classification): ℓ(y, a) = log(1 + e^{−ya}),
//!   labels ±1, L = 1, M = 1/4
//! * exponential: ℓ(y, a) = e^{−ya}, labels ±1, L = M = e^{κR}
//!
//! Constants are always the interval-local ones: even globally Lipschitz
//! losses are constructed with an explicit (κ, R) so every caller gets the
//! same contract. Classification losses reject labels outside {−1, 1};
//! a silently wrong label would corrupt every downstream bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent clamp: e^±700 is still finite in f64, beyond overflows.
const EXP_CLAMP: f64 = 700.0;

fn exp_clamped(z: f64) -> f64 {
    z.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}

/// log(1 + e^z) computed without overflow for large |z|.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic sigmoid 1 / (1 + e^{−z}), stable at both tails.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Which loss function, with per-kind parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LossKind {
    /// (y − a)² with labels in [−label_bound, label_bound].
    Squared { label_bound: f64 },
    /// −log(4 e^{y−a} / (1 + e^{y−a})²) with real labels.
    LogisticRegression,
    /// log(1 + e^{−ya}) with labels in {−1, 1}.
    LogisticClassification,
    /// e^{−ya} with labels in {−1, 1}.
    Exponential,
}

impl LossKind {
    /// Parse the config-file spelling of a loss kind. The squared loss
    /// takes its label bound separately.
    pub fn from_name(name: &str, label_bound: Option<f64>) -> Result<Self> {
        match name {
            "squared" => {
                let b = label_bound.ok_or(Error::MissingLabelBound)?;
                if b <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "label bound must be positive, got {b}"
                    )));
                }
                Ok(LossKind::Squared { label_bound: b })
            }
            "logistic_regression" => Ok(LossKind::LogisticRegression),
            "logistic_classification" => Ok(LossKind::LogisticClassification),
            "exponential" => Ok(LossKind::Exponential),
            other => Err(Error::InvalidParameter(format!("unknown loss kind `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LossKind::Squared { .. } => "squared",
            LossKind::LogisticRegression => "logistic_regression",
            LossKind::LogisticClassification => "logistic_classification",
            LossKind::Exponential => "exponential",
        }
    }
}

/// Lipschitz and smoothness constants valid on [−κR, κR].
///
/// `kappa >= 1` and `radius > 0` are required; the squared loss reads its
/// label bound from the kind.
pub fn loss_constants(kind: LossKind, kappa: f64, radius: f64) -> Result<(f64, f64)> {
    if kappa < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "kappa must be at least 1, got {kappa}"
        )));
    }
    if radius < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "radius must be nonnegative, got {radius}"
        )));
    }
    Ok(match kind {
        LossKind::Squared { label_bound } => {
            if label_bound <= 0.0 {
                return Err(Error::MissingLabelBound);
            }
            (2.0 * (label_bound + kappa * radius), 2.0)
        }
        LossKind::LogisticRegression => (1.0, 1.0),
        LossKind::LogisticClassification => (1.0, 0.25),
        LossKind::Exponential => {
            let e = exp_clamped(kappa * radius);
            (e, e)
        }
    })
}

/// A loss together with the constants certifying its regularity on the
/// working interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    kind: LossKind,
    lipschitz: f64,
    smoothness: f64,
    kappa: f64,
    radius: f64,
}

impl LossModel {
    /// Build a loss model with interval-local constants for the working
    /// interval [−kappa·radius, kappa·radius].
    pub fn new(kind: LossKind, kappa: f64, radius: f64) -> Result<Self> {
        let (lipschitz, smoothness) = loss_constants(kind, kappa, radius)?;
        Ok(Self {
            kind,
            lipschitz,
            smoothness,
            kappa,
            radius,
        })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// Lipschitz constant L of ℓ(y, ·) on the working interval.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Smoothness constant M (Lipschitz constant of ℓ′) on the working
    /// interval.
    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The symmetric working interval [−κR, κR].
    pub fn working_interval(&self) -> (f64, f64) {
        let half = self.kappa * self.radius;
        (-half, half)
    }

    /// Check that a label belongs to the loss's label set.
    pub fn check_label(&self, y: f64) -> Result<()> {
        if !y.is_finite() {
            return Err(Error::InvalidLabel {
                kind: self.kind.name(),
                y,
            });
        }
        match self.kind {
            LossKind::Squared { label_bound } => {
                if y.abs() > label_bound {
                    return Err(Error::InvalidLabel {
                        kind: "squared",
                        y,
                    });
                }
            }
            LossKind::LogisticRegression => {}
            LossKind::LogisticClassification | LossKind::Exponential => {
                if y != 1.0 && y != -1.0 {
                    return Err(Error::InvalidLabel {
                        kind: self.kind.name(),
                        y,
                    });
                }
            }
        }
        Ok(())
    }

    /// ℓ(y, a). Validates the label.
    pub fn value(&self, y: f64, a: f64) -> Result<f64> {
        self.check_label(y)?;
        Ok(self.value_unchecked(y, a))
    }

    /// ℓ′(y, a), the derivative in the second argument. Validates the label.
    pub fn derivative(&self, y: f64, a: f64) -> Result<f64> {
        self.check_label(y)?;
        Ok(self.derivative_unchecked(y, a))
    }

    /// ℓ(y, a) assuming the label has already been validated.
    #[inline]
    pub fn value_unchecked(&self, y: f64, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared { .. } => (y - a) * (y - a),
            LossKind::LogisticRegression => {
                // −log(4 e^z / (1+e^z)²) = 2·softplus(z) − z − log 4, z = y − a
                let z = y - a;
                2.0 * softplus(z) - z - 4f64.ln()
            }
            LossKind::LogisticClassification => softplus(-y * a),
            LossKind::Exponential => exp_clamped(-y * a),
        }
    }

    /// ℓ′(y, a) assuming the label has already been validated.
    #[inline]
    pub fn derivative_unchecked(&self, y: f64, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared { .. } => 2.0 * (a - y),
            LossKind::LogisticRegression => 1.0 - 2.0 * sigmoid(y - a),
            LossKind::LogisticClassification => -y * sigmoid(-y * a),
            LossKind::Exponential => -y * exp_clamped(-y * a),
        }
    }

    /// ℓ″(y, a); used by the ascent probes that search for suprema of
    /// gradient-composite classes.
    #[inline]
    pub fn second_derivative(&self, y: f64, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared { .. } => 2.0,
            LossKind::LogisticRegression => {
                let s = sigmoid(y - a);
                2.0 * s * (1.0 - s)
            }
            LossKind::LogisticClassification => {
                let s = sigmoid(-y * a);
                s * (1.0 - s)
            }
            LossKind::Exponential => exp_clamped(-y * a),
        }
    }
}
