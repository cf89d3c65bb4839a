use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{y_transform, ModelError, SCurveModel, Variant};
use super::simplex::{minimize, SimplexOptions};
use crate::sampling::SubspaceStats;

/// One observed point of the S-curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub w: f64,
    pub p_hat: f64,
    pub samples: u64,
}

impl From<&SubspaceStats> for DataPoint {
    fn from(s: &SubspaceStats) -> Self {
        Self {
            w: s.weight() as f64,
            p_hat: s.p_hat(),
            samples: s.num_samples(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Transformed values `y = ln(1/(2p) - 1)`, usable points only.
    Y,
    /// Raw probabilities, all points.
    P,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {required} usable data points, have {usable}")]
    InsufficientData { usable: usize, required: usize },
    #[error("simplex search did not converge within {iterations} iterations")]
    FitDiverged { iterations: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Weight Y-domain residuals by their inverse delta-method variance.
    pub weighted: bool,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            weighted: true,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: SCurveModel,
    pub r_squared_y: f64,
    pub r_squared_p: f64,
    /// `p_hat - f(w)` for every data point.
    pub residuals: Vec<f64>,
    /// `y - y_model(w)` for usable points, `None` elsewhere.
    pub y_residuals: Vec<Option<f64>>,
    pub data: Vec<DataPoint>,
    pub weighted: bool,
    /// The unconstrained solution violated positivity and was replaced by a
    /// constrained simplex search.
    pub projected: bool,
}

fn usable(p: &DataPoint, variant: Variant, t: u32) -> bool {
    let onset = match variant {
        Variant::Ibm => 0.0,
        _ => t as f64,
    };
    p.samples > 0 && p.p_hat > 0.0 && p.p_hat < 0.5 && p.w > onset
}

/// Inverse variance of `y(p_hat)`: `n p (1 - 2p)^2 / (1 - p)`.
fn y_weight(p: &DataPoint, weighted: bool) -> f64 {
    if !weighted {
        return 1.0;
    }
    let q = p.p_hat;
    p.samples as f64 * q * (1.0 - 2.0 * q).powi(2) / (1.0 - q)
}

/// Least-squares S-curve fit in the Y domain.
///
/// Power-law variants are linear in `(1/alpha, mu/alpha, beta)` on the basis
/// `{w, 1, (w - t)^-s}` and are solved directly; a solution with
/// `alpha <= 0` or `beta <= 0` is replaced by a simplex search over
/// `(ln alpha, mu, ln beta)`. The IBM model has `beta` fixed at `t + 1`; it
/// starts from a log-log regression and is refined by simplex over
/// `(ln mu, ln alpha)`.
pub fn fit(data: &[DataPoint], variant: Variant, t: u32, opts: FitOptions) -> Result<FitResult, FitError> {
    let points: Vec<&DataPoint> = data.iter().filter(|p| usable(p, variant, t)).collect();
    if points.len() < 3 {
        return Err(FitError::InsufficientData {
            usable: points.len(),
            required: 3,
        });
    }
    let ys: Vec<f64> = points.iter().map(|p| y_transform(p.p_hat)).collect::<Result<_, _>>()?;
    let ws: Vec<f64> = points.iter().map(|p| y_weight(p, opts.weighted)).collect();
    let sse = |m: &SCurveModel| -> f64 {
        points
            .iter()
            .zip(&ys)
            .zip(&ws)
            .map(|((p, y), wt)| wt * (y - m.y(p.w).unwrap_or(f64::INFINITY)).powi(2))
            .sum()
    };
    let simplex = SimplexOptions {
        max_iterations: opts.max_iterations,
        ..SimplexOptions::default()
    };

    let (model, projected) = match variant.s() {
        Some(s) => {
            let n = points.len();
            let mut a = DMatrix::<f64>::zeros(n, 3);
            let mut b = DVector::<f64>::zeros(n);
            for (i, p) in points.iter().enumerate() {
                let r = ws[i].sqrt();
                a[(i, 0)] = r * p.w;
                a[(i, 1)] = r;
                a[(i, 2)] = r * (p.w - t as f64).powf(-s);
                b[i] = r * ys[i];
            }
            let coef = a
                .svd(true, true)
                .solve(&b, 1e-14)
                .map_err(|e| ModelError::InvalidParameters(e.to_string()))?;
            let (slope, intercept, beta) = (coef[0], coef[1], coef[2]);
            let direct = (slope < 0.0 && beta > 0.0)
                .then(|| SCurveModel::new(variant, t, -intercept / slope, -1.0 / slope, beta).ok())
                .flatten();
            match direct {
                Some(m) => (m, false),
                None => {
                    let span = points.iter().map(|p| p.w).fold(0.0, f64::max).max(1.0);
                    let alpha0 = if slope < 0.0 { -1.0 / slope } else { span };
                    let mu0 = if slope < 0.0 { -intercept / slope } else { span / 2.0 };
                    let beta0 = if beta > 0.0 { beta } else { 1.0 };
                    let objective = |x: &[f64]| {
                        SCurveModel::new(variant, t, x[1], x[0].exp(), x[2].exp()).map_or(f64::INFINITY, |m| sse(&m))
                    };
                    let r = minimize(objective, &[alpha0.ln(), mu0, beta0.ln()], simplex);
                    if !r.converged {
                        return Err(FitError::FitDiverged {
                            iterations: r.iterations,
                        });
                    }
                    (SCurveModel::new(variant, t, r.x[1], r.x[0].exp(), r.x[2].exp())?, true)
                }
            }
        }
        None => {
            // f depends on mu and beta only through mu * beta^-alpha, so beta
            // is pinned at the onset weight and the rest is fitted. The start
            // comes from ln(-ln(1 - 2f)) = ln(2 mu) - alpha ln(beta) + alpha ln(w).
            let beta = t as f64 + 1.0;
            let xs: Vec<f64> = points.iter().map(|p| p.w.ln()).collect();
            let zs: Vec<f64> = points.iter().map(|p| (-(-2.0 * p.p_hat).ln_1p()).ln()).collect();
            let n = xs.len() as f64;
            let (mx, mz) = (xs.iter().sum::<f64>() / n, zs.iter().sum::<f64>() / n);
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            if sxx <= 0.0 {
                return Err(FitError::InsufficientData { usable: 1, required: 3 });
            }
            let sxz: f64 = xs.iter().zip(&zs).map(|(x, z)| (x - mx) * (z - mz)).sum();
            let alpha0 = (sxz / sxx).max(1e-3);
            let mu0 = 0.5 * (mz - alpha0 * mx + alpha0 * beta.ln()).exp();
            let objective = |x: &[f64]| {
                SCurveModel::new(variant, t, x[0].exp(), x[1].exp(), beta).map_or(f64::INFINITY, |m| sse(&m))
            };
            let r = minimize(objective, &[mu0.ln(), alpha0.ln()], simplex);
            if !r.converged {
                return Err(FitError::FitDiverged {
                    iterations: r.iterations,
                });
            }
            (SCurveModel::new(variant, t, r.x[0].exp(), r.x[1].exp(), beta)?, false)
        }
    };
    Ok(assemble(model, data, opts.weighted, projected))
}

fn assemble(model: SCurveModel, data: &[DataPoint], weighted: bool, projected: bool) -> FitResult {
    let residuals = data.iter().map(|p| p.p_hat - model.eval_f(p.w)).collect();
    let y_residuals = data
        .iter()
        .map(|p| {
            usable(p, model.variant, model.t)
                .then(|| Some(y_transform(p.p_hat).ok()? - model.y(p.w).ok()?))
                .flatten()
        })
        .collect();
    FitResult {
        model,
        r_squared_y: r_squared(data, &model, Domain::Y).unwrap_or(f64::NAN),
        r_squared_p: r_squared(data, &model, Domain::P).unwrap_or(f64::NAN),
        residuals,
        y_residuals,
        data: data.to_vec(),
        weighted,
        projected,
    }
}

/// Coefficient of determination `1 - SS_res / SS_tot` (unweighted).
///
/// In the Y domain only usable points count; in the P domain every point with
/// at least one sample does.
pub fn r_squared(data: &[DataPoint], m: &SCurveModel, domain: Domain) -> Result<f64, FitError> {
    let pairs: Vec<(f64, f64)> = match domain {
        Domain::Y => data
            .iter()
            .filter(|p| usable(p, m.variant, m.t))
            .filter_map(|p| Some((y_transform(p.p_hat).ok()?, m.y(p.w).ok()?)))
            .collect(),
        Domain::P => data
            .iter()
            .filter(|p| p.samples > 0)
            .map(|p| (p.p_hat, m.eval_f(p.w)))
            .collect(),
    };
    if pairs.len() < 2 {
        return Err(FitError::InsufficientData {
            usable: pairs.len(),
            required: 2,
        });
    }
    let mean = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
    let ss_tot: f64 = pairs.iter().map(|p| (p.0 - mean).powi(2)).sum();
    let ss_res: f64 = pairs.iter().map(|p| (p.0 - p.1).powi(2)).sum();
    Ok(if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    })
}
