use statrs::function::factorial::ln_binomial;

/// `C(c, w) p^w (1-p)^(c-w)`, evaluated in log space.
pub fn binomial_weight_probability(c: usize, p: f64, w: usize) -> f64 {
    assert!(w <= c, "weight {w} exceeds location count {c}");
    assert!((0.0..=1.0).contains(&p), "probability {p} out of range");
    if p == 0.0 {
        return if w == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if w == c { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(c as u64, w as u64) + w as f64 * p.ln() + (c - w) as f64 * (-p).ln_1p();
    ln.exp()
}

/// Weights within five standard deviations of the binomial mean, clamped to
/// `[t + 1, c]`. Returns `None` when the clamped interval is empty.
pub fn critical_region(c: usize, p: f64, t: usize) -> Option<(usize, usize)> {
    let mean = c as f64 * p;
    let sigma = (c as f64 * p * (1.0 - p)).sqrt();
    let lo = (mean - 5.0 * sigma).floor().max(0.0) as usize;
    let hi = ((mean + 5.0 * sigma).ceil() as usize).min(c);
    let lo = lo.max(t + 1);
    (lo <= hi).then_some((lo, hi))
}
