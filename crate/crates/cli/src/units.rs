//! Quantities with explicit unit suffixes. A bare number is taken as SI.

fn split(input: &str) -> (&str, &str) {
    let s = input.trim();
    let idx = s
        .char_indices()
        .find(|&(i, c)| {
            c.is_alphabetic() && c != 'e' && c != 'E'
                || (c == 'e' || c == 'E') && !s[i + c.len_utf8()..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')
        })
        .map_or(s.len(), |(i, _)| i);
    (s[..idx].trim(), s[idx..].trim())
}

fn parse(input: &str, table: &[(&str, f64)], what: &str) -> Result<f64, String> {
    let (num, unit) = split(input);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("'{input}' is not a {what} (expected e.g. {})", table[1].0))?;
    if !value.is_finite() {
        return Err(format!("'{input}' is not finite"));
    }
    let scale = if unit.is_empty() {
        1.0
    } else {
        table
            .iter()
            .find(|(u, _)| *u == unit)
            .map(|(_, s)| *s)
            .ok_or_else(|| {
                let known: Vec<&str> = table.iter().map(|(u, _)| *u).collect();
                format!("unknown {what} unit '{unit}' (known: {})", known.join(", "))
            })?
    };
    Ok(value * scale)
}

pub fn length(s: &str) -> Result<f64, String> {
    parse(s, &[("m", 1.0), ("mm", 1e-3), ("cm", 1e-2), ("um", 1e-6), ("µm", 1e-6), ("nm", 1e-9)], "length")
}

pub fn frequency(s: &str) -> Result<f64, String> {
    parse(s, &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)], "frequency")
}

pub fn temperature(s: &str) -> Result<f64, String> {
    parse(s, &[("K", 1.0), ("mK", 1e-3), ("uK", 1e-6)], "temperature")
}

pub fn mass(s: &str) -> Result<f64, String> {
    parse(s, &[("kg", 1.0), ("g", 1e-3), ("mg", 1e-6), ("ug", 1e-9)], "mass")
}

pub fn field(s: &str) -> Result<f64, String> {
    parse(s, &[("T", 1.0), ("mT", 1e-3), ("G", 1e-4)], "flux density")
}

/// A radius, or `edge` for the default stub-edge coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Edge,
    Value(f64),
}

pub fn radius(s: &str) -> Result<Radius, String> {
    if s.trim().eq_ignore_ascii_case("edge") {
        Ok(Radius::Edge)
    } else {
        length(s).map(Radius::Value)
    }
}
