//! Per-iteration convergence records and their CSV form.

use std::io::Write;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub elapsed_seconds: f64,
    /// Exact composite objective at the iterate.
    pub objective: f64,
    /// `objective - reference optimum`, when a reference is known.
    pub gap: Option<f64>,
}

/// Formats a float with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Fills the gap column against `reference`.
pub fn attach_gap(trace: &mut [TraceRecord], reference: f64) {
    for r in trace {
        r.gap = Some(r.objective - reference);
    }
}

/// Writes `iteration,elapsed_seconds,objective[,<gap_column>]` rows with LF
/// line endings. The gap column is emitted when `gap_column` is given.
pub fn write_csv<W: Write>(out: W, trace: &[TraceRecord], gap_column: Option<&str>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["iteration", "elapsed_seconds", "objective"];
    if let Some(name) = gap_column {
        header.push(name);
    }
    w.write_record(&header)?;
    for r in trace {
        let mut row = vec![
            r.iteration.to_string(),
            format_f64(r.elapsed_seconds),
            format_f64(r.objective),
        ];
        if gap_column.is_some() {
            row.push(r.gap.map(format_f64).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Checks the ordering invariants: strictly increasing iterations and
/// non-decreasing elapsed time.
pub fn is_well_ordered(trace: &[TraceRecord]) -> bool {
    trace.windows(2).all(|w| {
        w[0].iteration < w[1].iteration && w[0].elapsed_seconds <= w[1].elapsed_seconds
    })
}
