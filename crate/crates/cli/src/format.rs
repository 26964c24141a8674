//! Byte-stable number and CSV formatting.

use std::fmt::Write as _;

/// `%.17g` with trailing zeros removed: the shortest fixed or exponent form
/// carrying 17 significant digits.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let fixed = format!("{x:.*}", (16 - exp) as usize);
        trim_fraction(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa), exp.abs())
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One row of a stage trace; `None` fields are written blank.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: u64,
    pub cardinality: Option<usize>,
    pub measure: Option<f64>,
    pub integral: Option<f64>,
}

pub const CSV_HEADER: &str = "k,cardinality,measure,integral";

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let card = row.cardinality.map(|c| c.to_string()).unwrap_or_default();
        let measure = row.measure.map(g17).unwrap_or_default();
        let integral = row.integral.map(g17).unwrap_or_default();
        writeln!(out, "{},{card},{measure},{integral}", row.k).expect("writing to a String");
    }
    out
}
