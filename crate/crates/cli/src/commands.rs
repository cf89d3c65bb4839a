use std::collections::hash_map::RandomState;
use std::hash::BuildHasher;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use ler_core::circuit::{generate_code, parse_circuit, CodeFamily, CodeSpec};
use ler_core::decoder::{DecoderError, MatchingConfig, MatchingDecoder};
use ler_core::pipeline::{run_scaler_with, AdapSamConfig, EstimateReport, PipelineError, ReportFlag, SCHEMA_VERSION};
use ler_core::sampling::{write_stats_csv, BaselineStop, Sampler, SamplingError, StopReason, SubspaceStats};
use ler_core::scurve::{fit as fit_curve, write_plot_csv, y_transform, DataPoint, FitError, FitOptions, FitResult};
use ler_core::{Circuit, Qepg, SCurveModel, SamplerConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::manifest::{with_suffix, RunManifest};
use crate::svg::Plot;
use crate::{BaselineArgs, CliError, CompareArgs, CompileArgs, EstimateArgs, FitArgs, GenArgs, SeedArgs};

/// Exponents of the generalized-model sweep.
pub const SWEEP_EXPONENTS: [(u32, u32); 5] = [(1, 4), (1, 3), (1, 2), (1, 1), (2, 1)];

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

fn load_circuit(path: &Path, manifest: &mut RunManifest) -> Result<Circuit, CliError> {
    let bytes = read(path)?;
    manifest.input(path, &bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::Config(format!("{}: not UTF-8 text", path.display())))?;
    parse_circuit(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn to_json(value: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn stats_csv(stats: &[SubspaceStats]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_stats_csv(&mut buf, stats).map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(buf)
}

/// The explicit seed, or a fresh one. Either way it is printed.
fn resolve_seed(args: &SeedArgs) -> u64 {
    let seed = args.seed.unwrap_or_else(|| {
        let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
        RandomState::new().hash_one(nanos)
    });
    let origin = if args.seed.is_some() { "" } else { " (generated)" };
    eprintln!("seed: {seed}{origin}");
    seed
}

/// Serialized name of a unit enum variant.
fn serde_name(v: &impl Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn parse_variant(s: &str) -> Result<Variant, CliError> {
    s.parse().map_err(CliError::Config)
}

fn decoder_error(e: DecoderError) -> CliError {
    match e {
        DecoderError::TooManyDefects { .. } => CliError::Internal(e.to_string()),
        _ => CliError::Config(e.to_string()),
    }
}

fn sampling_error(e: SamplingError) -> CliError {
    match e {
        SamplingError::ThreadPool(_) => CliError::Internal(e.to_string()),
        SamplingError::Decoder(d) => decoder_error(d),
        _ => CliError::Config(e.to_string()),
    }
}

fn fit_error(e: FitError) -> CliError {
    match e {
        FitError::InsufficientData { .. } | FitError::Model(_) => CliError::Config(e.to_string()),
        FitError::FitDiverged { .. } => CliError::Internal(e.to_string()),
    }
}

pub fn gen(args: &GenArgs) -> Result<(), CliError> {
    let family: CodeFamily = args.family.parse().map_err(CliError::Config)?;
    let mut spec = CodeSpec::new(family, args.distance);
    if let Some(r) = args.rounds {
        spec = spec.with_rounds(r);
    }
    let circuit = generate_code(spec).map_err(|e| CliError::Config(e.to_string()))?;
    let summary = format!(
        "qubits: {}, locations: {}, detectors: {}, observables: {}",
        circuit.num_qubits(),
        circuit.num_fault_locations(),
        circuit.detectors().len(),
        circuit.observables().len()
    );
    match &args.out {
        Some(path) => {
            let mut manifest = RunManifest::start(args, None);
            manifest.write_output(path, circuit.to_text().as_bytes())?;
            manifest.finish(path)?;
            println!("{summary}");
        }
        None => {
            print!("{}", circuit.to_text());
            eprintln!("{summary}");
        }
    }
    Ok(())
}

pub fn compile(args: &CompileArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::start(args, None);
    let circuit = load_circuit(&args.circuit, &mut manifest)?;
    let qepg = Qepg::compile(&circuit);
    let mut buf = Vec::new();
    qepg.write_to(&mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    manifest.write_output(&args.out, &buf)?;
    manifest.finish(&args.out)?;
    println!(
        "locations: {}, detectors: {}, observables: {}",
        qepg.num_locations(),
        qepg.num_detectors(),
        qepg.num_observables()
    );
    Ok(())
}

fn load_qepg(args: &EstimateArgs, circuit: &Circuit, manifest: &mut RunManifest) -> Result<Qepg, CliError> {
    let Some(path) = &args.qepg else {
        return Ok(Qepg::compile(circuit));
    };
    let bytes = read(path)?;
    manifest.input(path, &bytes);
    let qepg = Qepg::read_from(bytes.as_slice()).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if qepg.num_locations() != circuit.num_fault_locations() || qepg.num_detectors() != circuit.detectors().len() {
        return Err(CliError::Config(format!(
            "{} does not match {}",
            path.display(),
            args.circuit.display()
        )));
    }
    Ok(qepg)
}

/// S-curve plot of a fitted model over the sampled data, log scale.
fn scurve_plot(model: &SCurveModel, data: &[SubspaceStats], w_max: usize) -> Plot {
    let mut plot = Plot::new("Logical error rate per weight", "weight w", "P_L^w").log_y();
    let lo = model.t as usize + 1;
    let curve = (lo..=w_max.max(lo))
        .map(|w| (w as f64, model.eval_f(w as f64)))
        .collect();
    plot.line(&format!("fit ({})", model.variant), curve);
    plot.markers("sampled", data.iter().map(|s| (s.weight() as f64, s.p_hat())).collect());
    plot
}

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let seed = resolve_seed(&args.seed);
    let mut manifest = RunManifest::start(args, Some(seed));
    let cfg = AdapSamConfig {
        s_max: args.s_max,
        n_le: args.n_le,
        gamma: args.gamma,
        min_subspace_shots: args.min_subspace_shots,
        max_seconds: args.max_seconds,
        variant: parse_variant(&args.variant)?,
        ..AdapSamConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let circuit = load_circuit(&args.circuit, &mut manifest)?;
    let qepg = load_qepg(args, &circuit, &mut manifest)?;
    let decoder = MatchingDecoder::from_qepg(&qepg, MatchingConfig::default()).map_err(decoder_error)?;
    let sampler_cfg = SamplerConfig::new(seed).with_threads(args.seed.threads);
    let prefix = &args.out;

    let report = match run_scaler_with(&qepg, &decoder, args.distance, args.p, cfg, sampler_cfg) {
        Ok(r) => r,
        Err(PipelineError::BudgetExhausted { total_shots, subspaces }) => {
            manifest.write_output(&with_suffix(prefix, "subspaces.csv"), &stats_csv(&subspaces)?)?;
            manifest.finish(prefix)?;
            return Err(CliError::Budget(format!(
                "budget exhausted after {total_shots} shots before a curve could be fitted; partial subspace data written"
            )));
        }
        Err(PipelineError::Config(m)) => return Err(CliError::Config(m)),
        Err(e @ PipelineError::NoErrorsAnywhere { .. }) => return Err(CliError::Config(e.to_string())),
        Err(PipelineError::Sampling(e)) => return Err(sampling_error(e)),
        Err(PipelineError::Decoder(e)) => return Err(decoder_error(e)),
        Err(PipelineError::Fit(e)) => return Err(CliError::Internal(e.to_string())),
    };

    write_estimate_outputs(&report, prefix, &mut manifest)?;
    manifest.finish(prefix)?;
    println!(
        "p_l_hat: {:.6e}  (w_err {}, w_sweet {}, w_sat {}, {} subspaces, {} shots, stop: {})",
        report.p_l_hat,
        report.w_err,
        report.w_sweet,
        report.w_sat,
        report.subspaces.len(),
        report.total_shots,
        serde_name(&report.stop_reason)
    );
    if report.flags.contains(&ReportFlag::Partial) {
        return Err(CliError::Budget(
            "sampling stopped early; the estimate is partial".into(),
        ));
    }
    Ok(())
}

fn write_estimate_outputs(report: &EstimateReport, prefix: &Path, manifest: &mut RunManifest) -> Result<(), CliError> {
    manifest.write_output(&with_suffix(prefix, "json"), &to_json(report)?)?;
    manifest.write_output(&with_suffix(prefix, "subspaces.csv"), &stats_csv(&report.subspaces)?)?;
    let w_max = report
        .subspaces
        .iter()
        .map(|s| s.weight())
        .max()
        .unwrap_or(0)
        .max(report.w_sat.min(100_000) as usize);
    let model = report.fit.model;
    let data: Vec<DataPoint> = report.subspaces.iter().map(DataPoint::from).collect();
    let mut buf = Vec::new();
    write_plot_csv(&mut buf, &model, &data, w_max as u64).map_err(|e| CliError::Internal(e.to_string()))?;
    manifest.write_output(&with_suffix(prefix, "plot.csv"), &buf)?;
    let svg = scurve_plot(&model, &report.subspaces, w_max).render();
    manifest.write_output(&with_suffix(prefix, "svg"), svg.as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineReport {
    pub schema_version: u32,
    pub p: f64,
    pub seed: u64,
    pub shots: u64,
    pub logical_errors: u64,
    pub p_hat: f64,
    pub std_error: f64,
    pub stop_reason: StopReason,
    /// Realized fault weights with their shot and error counts.
    pub weight_histogram: Vec<SubspaceStats>,
}

pub fn baseline(args: &BaselineArgs) -> Result<(), CliError> {
    let seed = resolve_seed(&args.seed);
    let mut manifest = RunManifest::start(args, Some(seed));
    let circuit = load_circuit(&args.circuit, &mut manifest)?;
    let qepg = Qepg::compile(&circuit);
    let decoder = MatchingDecoder::from_qepg(&qepg, MatchingConfig::default()).map_err(decoder_error)?;
    let sampler = Sampler::new(
        &qepg,
        &decoder,
        SamplerConfig::new(seed).with_threads(args.seed.threads),
    )
    .map_err(sampling_error)?;
    let stop = BaselineStop {
        max_errors: Some(args.max_errors),
        max_shots: args.max_shots,
        max_seconds: args.max_seconds,
    };
    let r = sampler.sample_baseline(0, args.p, stop).map_err(sampling_error)?;
    let report = BaselineReport {
        schema_version: SCHEMA_VERSION,
        p: args.p,
        seed,
        shots: r.shots,
        logical_errors: r.logical_errors,
        p_hat: r.p_hat,
        std_error: r.std_error(),
        stop_reason: r.stop_reason,
        weight_histogram: r.histogram_stats(),
    };
    let prefix = &args.out;
    manifest.write_output(&with_suffix(prefix, "json"), &to_json(&report)?)?;
    manifest.write_output(
        &with_suffix(prefix, "histogram.csv"),
        &stats_csv(&report.weight_histogram)?,
    )?;
    manifest.finish(prefix)?;
    println!(
        "p_hat: {:.6e} +/- {:.2e}  ({} errors in {} shots, {:.2} s, stop: {})",
        r.p_hat,
        report.std_error,
        r.logical_errors,
        r.shots,
        r.elapsed_seconds,
        serde_name(&r.stop_reason)
    );
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitEntry {
    pub variant: String,
    pub s: Option<f64>,
    pub w_sweet: u64,
    pub w_sat: u64,
    pub result: FitResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub t: u32,
    pub gamma: f64,
    pub fits: Vec<FitEntry>,
}

/// Fits each variant to `stats`.
pub fn fit_variants(
    stats: &[SubspaceStats],
    variants: &[Variant],
    t: u32,
    gamma: f64,
    weighted: bool,
) -> Result<FitReport, FitError> {
    let data: Vec<DataPoint> = stats.iter().map(DataPoint::from).collect();
    let opts = FitOptions {
        weighted,
        ..FitOptions::default()
    };
    let fits = variants
        .iter()
        .map(|&v| {
            let result = fit_curve(&data, v, t, opts)?;
            Ok(FitEntry {
                variant: v.to_string(),
                s: v.s(),
                w_sweet: result.model.w_sweet(gamma),
                w_sat: result.model.w_sat().weight,
                result,
            })
        })
        .collect::<Result<_, FitError>>()?;
    Ok(FitReport {
        schema_version: SCHEMA_VERSION,
        t,
        gamma,
        fits,
    })
}

/// Y-curve plot of every fit over the observed data.
fn y_plot(report: &FitReport, stats: &[SubspaceStats]) -> Plot {
    let mut plot = Plot::new("Y-curve fits", "weight w", "y = ln(1/(2P) - 1)");
    let observed: Vec<(f64, f64)> = stats
        .iter()
        .filter_map(|s| y_transform(s.p_hat()).ok().map(|y| (s.weight() as f64, y)))
        .collect();
    let w_hi = stats.iter().map(|s| s.weight()).max().unwrap_or(0) as f64;
    let y_hi = observed.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let y_lo = observed.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    for entry in &report.fits {
        let m = entry.result.model;
        let start = m.t as f64 + 1.0;
        let steps = 200;
        let pts: Vec<(f64, f64)> = (0..=steps)
            .filter_map(|k| {
                let w = start + (w_hi + 2.0 - start) * k as f64 / steps as f64;
                m.y(w).ok().map(|y| (w, y))
            })
            .collect();
        // Flag curves that overshoot the observed range tenfold at the onset.
        let steep = pts
            .first()
            .is_some_and(|&(_, y)| y > y_hi + 10.0 * (y_hi - y_lo).max(1.0));
        let label = if steep {
            format!("{} (rises sharply near t)", entry.variant)
        } else {
            entry.variant.clone()
        };
        plot.line(&label, pts);
    }
    plot.markers("observed", observed);
    plot
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::start(args, None);
    let bytes = read(&args.data)?;
    manifest.input(&args.data, &bytes);
    let stats = ler_core::sampling::read_stats_csv(bytes.as_slice())
        .map_err(|e| CliError::Config(format!("{}: {e}", args.data.display())))?;
    if !(args.gamma > 0.0 && args.gamma.is_finite()) {
        return Err(CliError::Config(format!("gamma must be positive, got {}", args.gamma)));
    }
    let variants: Vec<Variant> = if args.sweep_s {
        SWEEP_EXPONENTS
            .iter()
            .map(|&(p, q)| Variant::Generalized { s: p as f64 / q as f64 })
            .collect()
    } else {
        vec![parse_variant(&args.variant)?]
    };
    let report = fit_variants(&stats, &variants, args.t, args.gamma, !args.unweighted).map_err(fit_error)?;
    let prefix = &args.out;
    manifest.write_output(&with_suffix(prefix, "json"), &to_json(&report)?)?;
    manifest.write_output(&with_suffix(prefix, "svg"), y_plot(&report, &stats).render().as_bytes())?;
    manifest.finish(prefix)?;
    for e in &report.fits {
        let m = e.result.model;
        println!(
            "{:<20} mu {:.4} alpha {:.4} beta {:.4}  R2(y) {:.6}  R2(P) {:.6}  w_sweet {} w_sat {}{}",
            e.variant,
            m.mu,
            m.alpha,
            m.beta,
            e.result.r_squared_y,
            e.result.r_squared_p,
            e.w_sweet,
            e.w_sat,
            if e.result.projected { "  [projected]" } else { "" }
        );
    }
    Ok(())
}

/// `(a - b) / b`, undefined when `b` is zero.
pub fn relative_error(a: f64, b: f64) -> Option<f64> {
    (b != 0.0).then(|| (a - b) / b)
}

/// Rate and optional standard error from an estimate or baseline report.
fn rate_of(path: &Path) -> Result<(f64, Option<f64>), CliError> {
    let v: serde_json::Value =
        serde_json::from_slice(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let rate = v
        .get("p_l_hat")
        .or_else(|| v.get("p_hat"))
        .and_then(|x| x.as_f64())
        .ok_or_else(|| CliError::Config(format!("{}: no p_l_hat or p_hat field", path.display())))?;
    Ok((rate, v.get("std_error").and_then(|x| x.as_f64())))
}

pub fn compare_text(a: (f64, Option<f64>), b: (f64, Option<f64>)) -> String {
    let mut out = format!("a: {:.6e}\nb: {:.6e}\n", a.0, b.0);
    match relative_error(a.0, b.0) {
        Some(r) => out.push_str(&format!("relative error: {:+.1}%\n", 100.0 * r)),
        None => out.push_str("baseline saw no errors; no relative error defined\n"),
    }
    let interval = |(x, se): (f64, Option<f64>)| (x - 1.96 * se.unwrap_or(0.0), x + 1.96 * se.unwrap_or(0.0));
    if a.1.is_none() && b.1.is_none() {
        out.push_str("confidence overlap: n/a (no standard errors)\n");
    } else {
        let (a0, a1) = interval(a);
        let (b0, b1) = interval(b);
        let overlap = a0 <= b1 && b0 <= a1;
        out.push_str(&format!(
            "confidence overlap (95%): {}\n",
            if overlap { "yes" } else { "no" }
        ));
    }
    out
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    print!("{}", compare_text(rate_of(&args.a)?, rate_of(&args.b)?));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_cases() {
        let r = relative_error(4.36e-6, 6.06e-6).unwrap();
        assert_eq!(format!("{:+.1}%", 100.0 * r), "-28.1%");
        assert_eq!(relative_error(1e-3, 1e-3), Some(0.0));
        assert_eq!(relative_error(1e-3, 0.0), None);
        assert!(compare_text((1e-3, None), (0.0, Some(0.0))).contains("baseline saw no errors"));
    }
}
