//! Losses on the signed distance difference `delta` of a comparison.
//!
//! The evaluation loss is the 0-1 loss of `sgn(delta)` against the label.
//! Training uses a margin surrogate on `y * delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Comparison label in `{-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Negative => -1.0,
            Label::Positive => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    /// Label of a nonzero difference; `None` for zero or NaN.
    pub fn from_sign(delta: f64) -> Option<Self> {
        if delta > 0.0 {
            Some(Label::Positive)
        } else if delta < 0.0 {
            Some(Label::Negative)
        } else {
            None
        }
    }
}

impl TryFrom<i64> for Label {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(Error::InvalidParameter(format!(
                "label must be -1 or +1, got {other}"
            ))),
        }
    }
}

impl From<Label> for i64 {
    fn from(label: Label) -> i64 {
        match label {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }
}

fn default_margin() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossSpec {
    /// 1 when `y * delta <= 0`, else 0. Evaluation only.
    ZeroOne,
    /// `max(0, margin - y * delta)`
    Hinge {
        #[serde(default = "default_margin")]
        margin: f64,
    },
    /// `log(1 + exp(-y * delta))`
    Logistic,
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec::Hinge {
            margin: default_margin(),
        }
    }
}

/// `y * delta`; positive iff `sgn(delta)` agrees with `y`.
pub fn margin(delta: f64, y: Label) -> f64 {
    y.value() * delta
}

impl LossSpec {
    pub fn validate(&self) -> Result<()> {
        if let LossSpec::Hinge { margin } = *self {
            if !(margin.is_finite() && margin > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "hinge margin must be positive, got {margin}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, LossSpec::ZeroOne)
    }

    pub(crate) fn require_differentiable(&self) -> Result<()> {
        if self.is_differentiable() {
            Ok(())
        } else {
            Err(Error::Unsupported("the 0-1 loss has no gradient"))
        }
    }

    pub fn value(&self, delta: f64, y: Label) -> f64 {
        let m = margin(delta, y);
        match *self {
            // A zero difference expresses no preference and counts as an error.
            LossSpec::ZeroOne => {
                if m <= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            LossSpec::Hinge { margin: target } => (target - m).max(0.0),
            LossSpec::Logistic => (-m.abs()).exp().ln_1p() + (-m).max(0.0),
        }
    }

    /// Derivative of [`LossSpec::value`] with respect to `delta`. The hinge
    /// subgradient at the kink is 0.
    pub fn grad_wrt_delta(&self, delta: f64, y: Label) -> Result<f64> {
        let yv = y.value();
        let m = yv * delta;
        match *self {
            LossSpec::ZeroOne => Err(Error::Unsupported("the 0-1 loss has no gradient")),
            LossSpec::Hinge { margin: target } => Ok(if m < target { -yv } else { 0.0 }),
            LossSpec::Logistic => Ok(-yv * sigmoid(-m)),
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const HINGE: LossSpec = LossSpec::Hinge { margin: 1.0 };

    #[test]
    fn margin_examples() {
        let u0 = 1.0;
        assert_eq!(margin(-4.0 * u0, Label::Negative), 4.0);
        assert_eq!(margin(0.0, Label::Positive), 0.0);
        assert_eq!(margin(0.0, Label::Negative), 0.0);
        assert_eq!(margin(2.5, Label::Positive), 2.5);
    }

    #[test]
    fn value_examples() {
        assert_eq!(LossSpec::ZeroOne.value(-4.0, Label::Negative), 0.0);
        assert_eq!(LossSpec::ZeroOne.value(0.0, Label::Negative), 1.0);
        assert_eq!(LossSpec::ZeroOne.value(0.0, Label::Positive), 1.0);
        assert_eq!(HINGE.value(0.0, Label::Positive), 1.0);
        assert!((LossSpec::Logistic.value(0.0, Label::Positive) - 2f64.ln()).abs() < 1e-15);
        // no overflow far from the origin
        assert_eq!(LossSpec::Logistic.value(1e4, Label::Positive), 0.0);
        assert!((LossSpec::Logistic.value(-1e4, Label::Positive) - 1e4).abs() < 1e-9);
    }

    #[test]
    fn grad_examples() {
        assert_eq!(
            LossSpec::Logistic
                .grad_wrt_delta(0.0, Label::Positive)
                .unwrap(),
            -0.5
        );
        assert_eq!(HINGE.grad_wrt_delta(5.0, Label::Positive).unwrap(), 0.0);
        assert_eq!(HINGE.grad_wrt_delta(0.5, Label::Positive).unwrap(), -1.0);
        assert_eq!(HINGE.grad_wrt_delta(1.0, Label::Positive).unwrap(), 0.0);
        assert!(matches!(
            LossSpec::ZeroOne.grad_wrt_delta(0.0, Label::Positive),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn finite_difference_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-6;
        for spec in [HINGE, LossSpec::Hinge { margin: 0.5 }, LossSpec::Logistic] {
            let mut checked = 0;
            while checked < 1000 {
                let delta = rng.random_range(-6.0..6.0);
                let y = if rng.random_bool(0.5) {
                    Label::Positive
                } else {
                    Label::Negative
                };
                if let LossSpec::Hinge { margin: t } = spec {
                    if (margin(delta, y) - t).abs() < 1e-3 {
                        continue;
                    }
                }
                let fd = (spec.value(delta + h, y) - spec.value(delta - h, y)) / (2.0 * h);
                let g = spec.grad_wrt_delta(delta, y).unwrap();
                assert!(
                    (g - fd).abs() <= 1e-5,
                    "{spec:?} {delta} {y:?}: {g} vs {fd}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn labels_parse() {
        assert_eq!(Label::try_from(1).unwrap(), Label::Positive);
        assert_eq!(Label::try_from(-1).unwrap(), Label::Negative);
        assert!(Label::try_from(0).is_err());
        let l: Label = serde_json::from_str("-1").unwrap();
        assert_eq!(l, Label::Negative);
        assert!(serde_json::from_str::<Label>("2").is_err());
    }

    #[test]
    fn config_parse() {
        let s: LossSpec = serde_json::from_str(r#"{"kind":"hinge"}"#).unwrap();
        assert_eq!(s, HINGE);
        let s: LossSpec = serde_json::from_str(r#"{"kind":"zero_one"}"#).unwrap();
        assert_eq!(s, LossSpec::ZeroOne);
        assert!(LossSpec::Hinge { margin: 0.0 }.validate().is_err());
    }
}
