//! S-curve models of the per-weight logical error probability.
//!
//! A model maps a fault weight `w` to the probability that a uniformly random
//! weight-`w` fault set causes a logical error. Fitting happens on the
//! transformed Y-curve `ln(1/(2f) - 1)`, where the power-law variants are
//! linear in their parameters.

mod fit;
mod model;
pub mod simplex;

use std::io;

pub use fit::{fit, r_squared, DataPoint, Domain, FitError, FitOptions, FitResult};
pub use model::{y_transform, ModelError, SCurveModel, Saturation, Variant, SEARCH_CAP};

/// Writes `w,f,p_hat,samples` rows: the model on a unit grid over `[0, w_max]`
/// followed by the observed points. Model rows leave the data columns empty
/// and data rows leave `f` empty.
pub fn write_plot_csv<W: io::Write>(out: W, model: &SCurveModel, data: &[DataPoint], w_max: u64) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["w", "f", "p_hat", "samples"])?;
    for w in 0..=w_max {
        wtr.write_record([
            w.to_string(),
            model.eval_f(w as f64).to_string(),
            String::new(),
            String::new(),
        ])?;
    }
    for p in data {
        wtr.write_record([
            p.w.to_string(),
            String::new(),
            p.p_hat.to_string(),
            p.samples.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
