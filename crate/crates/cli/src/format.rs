use std::fmt::Write;

use psqfim::RMatrix;

pub const TEXT_DIGITS: usize = 12;
pub const CSV_DIGITS: usize = 17;

/// `x` rounded to `digits` significant digits, trailing zeros dropped.
pub fn sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format has an exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exponent) {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed == "-0" {
        "0".into()
    } else {
        trimmed.into()
    }
}

pub fn text(x: f64) -> String {
    sig(x, TEXT_DIGITS)
}

pub fn csv(x: f64) -> String {
    sig(x, CSV_DIGITS)
}

/// Right-aligned fixed-width matrix, one row per line, indented by two spaces.
pub fn matrix(m: &RMatrix) -> String {
    let cells: Vec<Vec<String>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| text(m[(r, c)])).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = String::new();
    for row in cells {
        out.push_str("  ");
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        out.push_str(&line.join("  "));
        out.push('\n');
    }
    out
}

/// Appends `quantity,i,j,value` rows for every entry of `m`.
pub fn matrix_csv(out: &mut String, name: &str, m: &RMatrix) {
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            writeln!(out, "{name},{r},{c},{}", csv(m[(r, c)])).unwrap();
        }
    }
}

pub fn scalar_csv(out: &mut String, name: &str, value: f64) {
    writeln!(out, "{name},,,{}", csv(value)).unwrap();
}
