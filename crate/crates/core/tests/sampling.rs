use ler_core::circuit::{generate_code, CodeFamily, CodeSpec};
use ler_core::decoder::{MatchingConfig, MatchingDecoder};
use ler_core::qepg::{Pauli, Qepg};
use ler_core::sampling::{
    binomial_weight_probability, BaselineStop, Sampler, SamplerConfig, SamplingError, StopReason,
};
use ler_oracles::binomial::binomial_pmf;

const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

fn setup(family: CodeFamily, d: u32, rounds: u32) -> (Qepg, MatchingDecoder) {
    let g = Qepg::compile(&generate_code(CodeSpec::new(family, d).with_rounds(rounds)).unwrap());
    let dec = MatchingDecoder::from_qepg(&g, MatchingConfig::default()).unwrap();
    (g, dec)
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let (g, dec) = setup(CodeFamily::Surface, 3, 3);
    let one = Sampler::new(&g, &dec, SamplerConfig::new(9).with_threads(1)).unwrap();
    let many = Sampler::new(&g, &dec, SamplerConfig::new(9).with_threads(3)).unwrap();
    assert_eq!(
        one.sample_weight(0, 4, 5000).unwrap(),
        many.sample_weight(0, 4, 5000).unwrap()
    );
    assert_eq!(
        one.sample_until_errors(1, 3, 20, 1_000_000).unwrap(),
        many.sample_until_errors(1, 3, 20, 1_000_000).unwrap()
    );
    let stop = BaselineStop {
        max_errors: Some(20),
        ..BaselineStop::default()
    };
    let a = one.sample_baseline(0, 0.01, stop).unwrap();
    let b = many.sample_baseline(0, 0.01, stop).unwrap();
    assert_eq!(
        (a.shots, a.logical_errors, &a.weight_histogram),
        (b.shots, b.logical_errors, &b.weight_histogram)
    );
    // Different seeds give different streams.
    let other = Sampler::new(&g, &dec, SamplerConfig::new(10)).unwrap();
    assert_ne!(
        one.sample_weight(0, 4, 5000).unwrap(),
        other.sample_weight(0, 4, 5000).unwrap()
    );
}

#[test]
fn stop_lands_on_crossing_shot() {
    let (g, dec) = setup(CodeFamily::Surface, 3, 3);
    let s = Sampler::new(&g, &dec, SamplerConfig::new(1)).unwrap();
    let (stats, reason) = s.sample_until_errors(0, 5, 30, 10_000_000).unwrap();
    assert_eq!(reason, StopReason::Errors);
    assert_eq!(stats.num_logical_errors(), 31);
    let (stats, reason) = s.sample_until_errors(0, 5, 30, 1234).unwrap();
    if reason == StopReason::Budget {
        assert_eq!(stats.num_samples(), 1234);
    }
    assert!(matches!(
        s.sample_until_errors(0, 5, 0, 10),
        Err(SamplingError::InvalidTarget)
    ));
    assert!(matches!(
        s.sample_weight(0, g.num_locations() + 1, 10),
        Err(SamplingError::WeightOutOfRange { .. })
    ));
}

/// Within `k` binomial standard errors of `p`.
fn close(hits: u64, n: u64, p: f64, k: f64) -> bool {
    let sd = (p * (1.0 - p) / n as f64).sqrt().max(1.0 / n as f64);
    ((hits as f64 / n as f64) - p).abs() <= k * sd
}

#[test]
fn stratified_rate_matches_exhaustive_enumeration() {
    let (g, dec) = setup(CodeFamily::Repetition, 3, 2);
    let s = Sampler::new(&g, &dec, SamplerConfig::new(2)).unwrap();
    for w in [2, 3] {
        let exact = s.enumerate_weight(w, &ALL).unwrap();
        let sampled = s.sample_weight(0, w, 200_000).unwrap();
        assert!(
            close(sampled.num_logical_errors(), sampled.num_samples(), exact.p_hat(), 4.0),
            "w={w}: {} vs {}",
            sampled.p_hat(),
            exact.p_hat()
        );
    }
}

#[test]
fn baseline_matches_stratified_decomposition() {
    // Small enough to enumerate every weight exactly.
    let (g, dec) = setup(CodeFamily::Repetition, 3, 1);
    let c = g.num_locations();
    let s = Sampler::new(&g, &dec, SamplerConfig::new(3)).unwrap();
    let p = 0.05;
    let exact: f64 = (0..=c)
        .map(|w| s.enumerate_weight(w, &ALL).unwrap().p_hat() * binomial_weight_probability(c, p, w))
        .sum();
    let stop = BaselineStop {
        max_errors: None,
        max_shots: Some(400_000),
        max_seconds: None,
    };
    let base = s.sample_baseline(0, p, stop).unwrap();
    assert_eq!(base.stop_reason, StopReason::Budget);
    assert_eq!(base.shots, 400_000);
    assert!(
        close(base.logical_errors, base.shots, exact, 4.0),
        "{} vs {exact}",
        base.p_hat
    );
    let hist_total: u64 = base.weight_histogram.values().map(|t| t.samples).sum();
    assert_eq!(hist_total, base.shots);
    // Realized weights follow Binomial(C, p).
    let w1 = base.weight_histogram.get(&1).map_or(0, |t| t.samples);
    assert!(close(w1, base.shots, binomial_weight_probability(c, p, 1), 4.0));
}

#[test]
fn baseline_stopping_rules() {
    let (g, dec) = setup(CodeFamily::Surface, 3, 3);
    let s = Sampler::new(&g, &dec, SamplerConfig::new(4)).unwrap();
    let r = s.sample_baseline(0, 0.01, BaselineStop::default()).unwrap();
    assert_eq!(r.stop_reason, StopReason::Errors);
    assert_eq!(r.logical_errors, 100);
    assert!(matches!(
        s.sample_baseline(0, 0.0, BaselineStop::default()),
        Err(SamplingError::InvalidErrorRate(_))
    ));
    let none = BaselineStop {
        max_errors: None,
        max_shots: None,
        max_seconds: None,
    };
    assert!(matches!(
        s.sample_baseline(0, 0.01, none),
        Err(SamplingError::NoStoppingBound)
    ));
}

#[test]
fn binomial_weights_match_exact_rationals() {
    let c = 9121;
    let total: f64 = (0..=c).map(|w| binomial_weight_probability(c, 5e-4, w)).sum();
    assert!((total - 1.0).abs() < 1e-9);
    let mode = (0..=c)
        .max_by(|&a, &b| binomial_weight_probability(c, 5e-4, a).total_cmp(&binomial_weight_probability(c, 5e-4, b)))
        .unwrap();
    assert_eq!(mode, 4);
    for w in [0u64, 1, 4, 10, 16, 30] {
        let exact = binomial_pmf(c as u64, w, 1, 2000);
        let got = binomial_weight_probability(c, 5e-4, w as usize);
        assert!((got / exact - 1.0).abs() < 1e-10, "w={w}: {got} vs {exact}");
    }
}
