//! Shared CSV number formatting: 17 significant digits, `.` separator.

pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn row(values: &[f64]) -> String {
    values.iter().map(|&v| sci(v)).collect::<Vec<_>>().join(",")
}
