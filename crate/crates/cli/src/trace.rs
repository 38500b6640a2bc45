//! Trace and summary CSV output.

use std::fmt::Write as _;
use std::io::Write;

use drmoo_core::RunTrace;

/// Reals carry 17 significant digits so traces round-trip exactly.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub fn trace_header(m: usize) -> String {
    let mut cols = vec!["iter".to_string(), "samples".into(), "wall_ms".into()];
    cols.extend((1..=m).map(|i| format!("loss_{i}")));
    cols.push("balanced_grad".into());
    cols.push("surrogate_stat".into());
    cols.extend((1..=m).map(|i| format!("w_{i}")));
    cols.extend((1..=m).map(|i| format!("eta_{i}")));
    cols.join(",")
}

/// One row per iteration; the surrogate column is `NaN` on iterations where
/// it was not computed.
pub fn write_trace<W: Write>(mut out: W, trace: &RunTrace) -> std::io::Result<()> {
    writeln!(out, "{}", trace_header(trace.num_objectives))?;
    let mut row = String::new();
    for r in &trace.records {
        row.clear();
        let _ = write!(row, "{},{},{}", r.iter, r.samples, fmt_real(r.wall_ms));
        for v in &r.losses {
            let _ = write!(row, ",{}", fmt_real(*v));
        }
        let _ = write!(
            row,
            ",{},{}",
            fmt_real(r.balanced_grad),
            fmt_real(r.surrogate_stat.unwrap_or(f64::NAN))
        );
        for v in r.w.iter().chain(&r.eta) {
            let _ = write!(row, ",{}", fmt_real(*v));
        }
        writeln!(out, "{row}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        assert_eq!(
            trace_header(2),
            "iter,samples,wall_ms,loss_1,loss_2,balanced_grad,surrogate_stat,w_1,w_2,eta_1,eta_2"
        );
    }

    #[test]
    fn reals_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_real(f64::NAN), "NaN");
    }
}
