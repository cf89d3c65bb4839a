use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// S-curve family.
///
/// - `Ours`: `f(w) = 1/2 * 1/(1 + e^y)` with `y = -(w - mu)/alpha + beta (w - t)^(-1/2)`, zero for `w <= t`
/// - `Generalized { s }`: the same with exponent `-s`
/// - `Ibm`: `f(w) = 1/2 * (1 - exp(-2 mu (w / beta)^alpha))`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Variant {
    Ours,
    Ibm,
    Generalized { s: f64 },
}

impl Variant {
    /// Exponent of the `(w - t)` term; `None` for the IBM model.
    pub fn s(&self) -> Option<f64> {
        match *self {
            Variant::Ours => Some(0.5),
            Variant::Generalized { s } => Some(s),
            Variant::Ibm => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Ours => f.write_str("ours"),
            Variant::Ibm => f.write_str("ibm"),
            Variant::Generalized { s } => write!(f, "generalized:{s}"),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    /// Accepts `ours`, `ibm`, `generalized:<s>` where `<s>` is a decimal or a
    /// fraction such as `1/3`.
    fn from_str(text: &str) -> Result<Self, String> {
        let lower = text.trim().to_ascii_lowercase();
        match lower.as_str() {
            "ours" => return Ok(Variant::Ours),
            "ibm" => return Ok(Variant::Ibm),
            _ => {}
        }
        let s = lower
            .strip_prefix("generalized:")
            .ok_or_else(|| format!("unknown variant `{text}`"))?;
        let value = match s.split_once('/') {
            Some((a, b)) => {
                let a: f64 = a.trim().parse().map_err(|_| format!("bad exponent `{s}`"))?;
                let b: f64 = b.trim().parse().map_err(|_| format!("bad exponent `{s}`"))?;
                a / b
            }
            None => s.trim().parse().map_err(|_| format!("bad exponent `{s}`"))?,
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("exponent must be positive, got {s}"));
        }
        Ok(Variant::Generalized { s: value })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParameters(String),
    #[error("{what} is undefined at w = {w}")]
    Domain { what: &'static str, w: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SCurveModel {
    pub variant: Variant,
    pub t: u32,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Result of [`SCurveModel::w_sat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Saturation {
    pub weight: u64,
    /// True when `f` stayed below 0.25 up to the search cap.
    pub capped: bool,
}

/// Upper end of the integer searches for the saturation weight.
pub const SEARCH_CAP: u64 = 1 << 40;

impl SCurveModel {
    pub fn new(variant: Variant, t: u32, mu: f64, alpha: f64, beta: f64) -> Result<Self, ModelError> {
        let m = Self {
            variant,
            t,
            mu,
            alpha,
            beta,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let finite = self.mu.is_finite() && self.alpha.is_finite() && self.beta.is_finite();
        if !finite || self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(ModelError::InvalidParameters(format!(
                "alpha and beta must be positive and finite (mu={}, alpha={}, beta={})",
                self.mu, self.alpha, self.beta
            )));
        }
        match self.variant {
            Variant::Ibm if self.mu <= 0.0 => Err(ModelError::InvalidParameters(
                "mu must be positive for the ibm model".into(),
            )),
            Variant::Generalized { s } if !(s.is_finite() && s > 0.0) => Err(ModelError::InvalidParameters(format!(
                "exponent s must be positive, got {s}"
            ))),
            _ => Ok(()),
        }
    }

    /// Smallest `w` where the model is defined and non-zero is above this.
    fn onset(&self) -> f64 {
        match self.variant {
            Variant::Ibm => 0.0,
            _ => self.t as f64,
        }
    }

    fn ibm_u(&self, w: f64) -> f64 {
        2.0 * self.mu * (w / self.beta).powf(self.alpha)
    }

    /// Logical error probability at weight `w`.
    pub fn eval_f(&self, w: f64) -> f64 {
        if w <= self.onset() {
            return 0.0;
        }
        match self.variant {
            Variant::Ibm => -0.5 * (-self.ibm_u(w)).exp_m1(),
            _ => {
                let y = self.y_unchecked(w);
                if y > 0.0 {
                    let e = (-y).exp();
                    0.5 * e / (1.0 + e)
                } else {
                    0.5 / (1.0 + y.exp())
                }
            }
        }
    }

    fn y_unchecked(&self, w: f64) -> f64 {
        match self.variant {
            Variant::Ibm => {
                let u = self.ibm_u(w);
                -u - (-(-u).exp_m1()).ln()
            }
            _ => {
                let s = self.variant.s().expect("power-law variant");
                -(w - self.mu) / self.alpha + self.beta * (w - self.t as f64).powf(-s)
            }
        }
    }

    /// Closed-form Y-curve `ln(1/(2 f(w)) - 1)`.
    pub fn y(&self, w: f64) -> Result<f64, ModelError> {
        if w <= self.onset() {
            return Err(ModelError::Domain { what: "y", w });
        }
        Ok(self.y_unchecked(w))
    }

    /// First and second derivatives of the Y-curve.
    pub fn y_derivatives(&self, w: f64) -> Result<(f64, f64), ModelError> {
        if w <= self.onset() {
            return Err(ModelError::Domain {
                what: "y derivatives",
                w,
            });
        }
        Ok(match self.variant {
            Variant::Ibm => {
                // y = g(u), g(u) = -u - ln(1 - e^-u), u = 2 mu (w/beta)^alpha
                let u = self.ibm_u(w);
                let a = self.alpha;
                let du = a * u / w;
                let ddu = a * (a - 1.0) * u / (w * w);
                let one_minus = -(-u).exp_m1();
                let g1 = -1.0 / one_minus;
                let g2 = (-u).exp() / (one_minus * one_minus);
                (g1 * du, g2 * du * du + g1 * ddu)
            }
            _ => {
                let s = self.variant.s().expect("power-law variant");
                let x = w - self.t as f64;
                let d1 = -1.0 / self.alpha - self.beta * s * x.powf(-s - 1.0);
                let d2 = self.beta * s * (s + 1.0) * x.powf(-s - 2.0);
                (d1, d2)
            }
        })
    }

    /// Largest integer `w > t` with `y''(w) >= gamma |y'(w)|`, scanning upward
    /// from `t + 1` until the inequality first fails; `t + 1` if it never holds.
    pub fn w_sweet(&self, gamma: f64) -> u64 {
        assert!(gamma > 0.0, "gamma must be positive");
        let start = self.t as u64 + 1;
        let holds = |w: u64| match self.y_derivatives(w as f64) {
            Ok((d1, d2)) => d2 >= gamma * d1.abs(),
            Err(_) => false,
        };
        if !holds(start) {
            return start;
        }
        let mut w = start;
        while w < SEARCH_CAP && holds(w + 1) {
            w += 1;
        }
        w
    }

    /// Largest integer `w` with `f(w) < 0.25`, by doubling then bisection.
    pub fn w_sat(&self) -> Saturation {
        let below = |w: u64| self.eval_f(w as f64) < 0.25;
        let mut lo = 0u64;
        let mut hi = (self.t as u64 + 1).max(1);
        while below(hi) {
            lo = hi;
            if hi >= SEARCH_CAP {
                return Saturation {
                    weight: SEARCH_CAP,
                    capped: true,
                };
            }
            hi = (hi * 2).min(SEARCH_CAP);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if below(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Saturation {
            weight: lo,
            capped: false,
        }
    }
}

/// `ln(1/(2f) - 1)`, defined for `0 < f < 0.5`.
pub fn y_transform(f: f64) -> Result<f64, ModelError> {
    if !(f > 0.0 && f < 0.5) {
        return Err(ModelError::Domain {
            what: "y_transform",
            w: f,
        });
    }
    Ok((-2.0 * f).ln_1p() - (2.0 * f).ln())
}
