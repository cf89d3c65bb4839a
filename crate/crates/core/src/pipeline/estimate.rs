use serde::{Deserialize, Serialize};

use crate::sampling::{binomial_weight_probability, critical_region};
use crate::scurve::SCurveModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub p_l_hat: f64,
    /// Inclusive weight range summed over; `None` when it is empty after
    /// clamping to `[t + 1, C]`.
    pub critical_region: Option<(usize, usize)>,
}

/// Binomially weighted sum of the model over the critical region
/// `[max(t + 1, floor(Cp - 5 sigma)), min(C, ceil(Cp + 5 sigma))]`.
pub fn estimate_logical_error_rate(model: &SCurveModel, c: usize, p: f64) -> Estimate {
    assert!(p > 0.0 && p < 1.0, "physical error rate {p} must lie in (0, 1)");
    let region = critical_region(c, p, model.t as usize);
    let p_l_hat = region.map_or(0.0, |(lo, hi)| {
        (lo..=hi)
            .map(|w| model.eval_f(w as f64) * binomial_weight_probability(c, p, w))
            .sum()
    });
    Estimate {
        p_l_hat,
        critical_region: region,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scurve::Variant;

    #[test]
    fn vanishing_model_gives_zero() {
        // mu far beyond the region keeps f below f64 resolution.
        let m = SCurveModel::new(Variant::Ours, 3, 1e6, 1.0, 1.0).unwrap();
        let e = estimate_logical_error_rate(&m, 9121, 5e-4);
        assert_eq!(e.p_l_hat, 0.0);
        assert_eq!(e.critical_region, Some((4, 16)));
    }

    #[test]
    fn empty_region() {
        let m = SCurveModel::new(Variant::Ours, 3, 10.0, 1.0, 1.0).unwrap();
        let e = estimate_logical_error_rate(&m, 11, 1e-6);
        assert_eq!(e.critical_region, None);
        assert_eq!(e.p_l_hat, 0.0);
    }
}
