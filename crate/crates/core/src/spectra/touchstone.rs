//! Touchstone v1 two-port (`.s2p`) files.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{from_db_deg, to_db_deg, ResonanceTrace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn scale(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }
}

impl fmt::Display for FrequencyUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrequencyUnit::Hz => "Hz",
            FrequencyUnit::KHz => "kHz",
            FrequencyUnit::MHz => "MHz",
            FrequencyUnit::GHz => "GHz",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataFormat {
    /// dB magnitude, angle in degrees.
    Db,
    /// Linear magnitude, angle in degrees.
    Ma,
    /// Real, imaginary.
    Ri,
}

impl DataFormat {
    fn decode(self, a: f64, b: f64) -> Complex64 {
        match self {
            DataFormat::Db => from_db_deg(a, b),
            DataFormat::Ma => Complex64::from_polar(a, b.to_radians()),
            DataFormat::Ri => Complex64::new(a, b),
        }
    }

    fn encode(self, s: Complex64) -> (f64, f64) {
        match self {
            // Exact zeros have no dB value; write the smallest normal magnitude.
            DataFormat::Db => to_db_deg(if s.norm() > 0.0 { s } else { Complex64::new(f64::MIN_POSITIVE, 0.0) }),
            DataFormat::Ma => (s.norm(), s.arg().to_degrees()),
            DataFormat::Ri => (s.re, s.im),
        }
    }
}

impl FromStr for DataFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DB" => Ok(DataFormat::Db),
            "MA" => Ok(DataFormat::Ma),
            "RI" => Ok(DataFormat::Ri),
            _ => Err(Error::param(format!("unknown data format '{s}'"))),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Db => "DB",
            DataFormat::Ma => "MA",
            DataFormat::Ri => "RI",
        })
    }
}

/// A parsed two-port file, keeping the numbers exactly as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Touchstone {
    pub unit: FrequencyUnit,
    pub format: DataFormat,
    pub reference_ohms: f64,
    /// Frequencies in `unit`.
    pub frequencies: Vec<f64>,
    /// Pairs for S11, S21, S12, S22 in `format`.
    pub data: Vec<[f64; 8]>,
}

impl Touchstone {
    pub fn from_parameters(
        frequencies_hz: &[f64],
        s: &[[Complex64; 4]],
        unit: FrequencyUnit,
        format: DataFormat,
    ) -> Self {
        let data = s
            .iter()
            .map(|row| {
                let mut out = [0.0; 8];
                for (k, v) in row.iter().enumerate() {
                    let (a, b) = format.encode(*v);
                    out[2 * k] = a;
                    out[2 * k + 1] = b;
                }
                out
            })
            .collect();
        Touchstone {
            unit,
            format,
            reference_ohms: 50.0,
            frequencies: frequencies_hz.iter().map(|f| f / unit.scale()).collect(),
            data,
        }
    }

    /// Writes S21 (and S12) from a trace; the reflections are filled in from
    /// power conservation of a lossless two-port.
    pub fn from_trace(trace: &ResonanceTrace, unit: FrequencyUnit, format: DataFormat) -> Self {
        let s: Vec<[Complex64; 4]> = trace
            .s21
            .iter()
            .map(|&t| {
                let refl = Complex64::new((1.0 - t.norm_sqr()).max(0.0).sqrt(), 0.0);
                [refl, t, t, refl]
            })
            .collect();
        Self::from_parameters(&trace.frequencies, &s, unit, format)
    }

    /// S11, S21, S12, S22 at row `i`.
    pub fn parameters(&self, i: usize) -> [Complex64; 4] {
        let d = &self.data[i];
        std::array::from_fn(|k| self.format.decode(d[2 * k], d[2 * k + 1]))
    }

    pub fn frequencies_hz(&self) -> Vec<f64> {
        self.frequencies.iter().map(|f| f * self.unit.scale()).collect()
    }

    pub fn convert(&self, format: DataFormat) -> Self {
        let s: Vec<_> = (0..self.data.len()).map(|i| self.parameters(i)).collect();
        let mut out = Self::from_parameters(&self.frequencies_hz(), &s, self.unit, format);
        out.frequencies = self.frequencies.clone();
        out.reference_ohms = self.reference_ohms;
        out
    }

    pub fn to_trace(&self, source_meta: impl Into<String>) -> Result<ResonanceTrace> {
        let s21 = (0..self.data.len()).map(|i| self.parameters(i)[1]).collect();
        ResonanceTrace::new(self.frequencies_hz(), s21, source_meta)
    }

    pub fn parse<R: BufRead>(source: R) -> Result<Self> {
        let mut option: Option<(FrequencyUnit, DataFormat, f64)> = None;
        let mut frequencies = Vec::new();
        let mut data = Vec::new();
        let mut last_line = 0;
        for (idx, line) in source.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
            let body = line.split('!').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('#') {
                if option.is_some() {
                    return Err(Error::format(lineno, "duplicate option line"));
                }
                if !data.is_empty() {
                    return Err(Error::format(lineno, "option line after data"));
                }
                option = Some(parse_option_line(rest, lineno)?);
                continue;
            }
            if option.is_none() {
                return Err(Error::format(lineno, "data before the option line"));
            }
            let values = body
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::format(lineno, format!("not a number: '{tok}'")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != 9 {
                return Err(Error::format(
                    lineno,
                    format!("expected 9 columns for a two-port row, got {}", values.len()),
                ));
            }
            if let Some(&prev) = frequencies.last() {
                if !(values[0] > prev) {
                    return Err(Error::format(lineno, "frequencies must be strictly increasing"));
                }
            }
            frequencies.push(values[0]);
            data.push(std::array::from_fn(|k| values[k + 1]));
            last_line = lineno;
        }
        let Some((unit, format, reference_ohms)) = option else {
            return Err(Error::format(last_line, "missing option line"));
        };
        if data.is_empty() {
            return Err(Error::NoData("Touchstone file has no data rows".into()));
        }
        Ok(Touchstone {
            unit,
            format,
            reference_ohms,
            frequencies,
            data,
        })
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {} S {} R {}", self.unit, self.format, self.reference_ohms)?;
        for (f, row) in self.frequencies.iter().zip(&self.data) {
            write!(out, "{f}")?;
            for v in row {
                write!(out, " {v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn parse_option_line(rest: &str, lineno: usize) -> Result<(FrequencyUnit, DataFormat, f64)> {
    let mut unit = FrequencyUnit::GHz;
    let mut format = DataFormat::Ma;
    let mut reference = 50.0;
    let mut tokens = rest.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => unit = FrequencyUnit::Hz,
            "KHZ" => unit = FrequencyUnit::KHz,
            "MHZ" => unit = FrequencyUnit::MHz,
            "GHZ" => unit = FrequencyUnit::GHz,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(Error::format(lineno, format!("only S parameters are supported, got {tok}")));
            }
            "DB" | "MA" | "RI" => format = tok.parse()?,
            "R" => {
                let value = tokens.next().ok_or_else(|| Error::format(lineno, "R without a value"))?;
                reference = value
                    .parse()
                    .map_err(|_| Error::format(lineno, format!("bad reference impedance '{value}'")))?;
            }
            _ => return Err(Error::format(lineno, format!("unknown option '{tok}'"))),
        }
    }
    Ok((unit, format, reference))
}

/// Reads a two-port Touchstone file and keeps its S21 column.
pub fn parse_touchstone<R: BufRead>(source: R) -> Result<ResonanceTrace> {
    Touchstone::parse(source)?.to_trace("touchstone")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_db_row() {
        let text = "# GHz S DB R 50\n9.95 -40 30 -20 45 -20 45 -35 10\n";
        let trace = parse_touchstone(text.as_bytes()).unwrap();
        assert_eq!(trace.frequencies, vec![9.95e9]);
        let (db, deg) = to_db_deg(trace.s21[0]);
        assert!((db + 20.0).abs() < 1e-12);
        assert!((deg - 45.0).abs() < 1e-12);
    }

    #[test]
    fn ma_and_ri_agree_with_db() {
        let text = "# MHz S DB R 50\n9950 -40 30 -20 45 -20 45 -35 10\n9951 -41 31 -21 46 -21 46 -36 11\n";
        let db = Touchstone::parse(text.as_bytes()).unwrap();
        for fmt in [DataFormat::Ma, DataFormat::Ri] {
            let mut buf = Vec::new();
            db.convert(fmt).write(&mut buf).unwrap();
            let other = Touchstone::parse(buf.as_slice()).unwrap();
            assert_eq!(other.format, fmt);
            assert_eq!(other.frequencies, db.frequencies);
            for i in 0..2 {
                for (a, b) in db.parameters(i).iter().zip(other.parameters(i)) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn comments_are_ignored() {
        let plain = "# GHz S RI R 50\n1 0 0 0.1 0.2 0.1 0.2 0 0\n2 0 0 0.3 0.4 0.3 0.4 0 0\n";
        let commented = "! header\n# GHz S RI R 50 ! trailing\n! between\n1 0 0 0.1 0.2 0.1 0.2 0 0 ! row\n\n!x\n2 0 0 0.3 0.4 0.3 0.4 0 0\n";
        assert_eq!(
            Touchstone::parse(plain.as_bytes()).unwrap(),
            Touchstone::parse(commented.as_bytes()).unwrap()
        );
    }

    #[test]
    fn errors() {
        let missing = "1 0 0 0 0 0 0 0 0\n";
        assert!(matches!(Touchstone::parse(missing.as_bytes()), Err(Error::Format { line: 1, .. })));
        let dup = "# GHz S RI R 50\n# GHz S RI R 50\n";
        assert!(matches!(Touchstone::parse(dup.as_bytes()), Err(Error::Format { line: 2, .. })));
        let cols = "# GHz S RI R 50\n1 0 0 0 0 0 0 0 0\n2 0 0 0 0 0 0 0\n";
        assert!(matches!(Touchstone::parse(cols.as_bytes()), Err(Error::Format { line: 3, .. })));
        let order = "# GHz S RI R 50\n2 0 0 0 0 0 0 0 0\n1 0 0 0 0 0 0 0 0\n";
        assert!(matches!(Touchstone::parse(order.as_bytes()), Err(Error::Format { line: 3, .. })));
        let empty = "# GHz S RI R 50\n";
        assert!(matches!(Touchstone::parse(empty.as_bytes()), Err(Error::NoData(_))));
        let z = "# GHz Z RI R 50\n";
        assert!(matches!(Touchstone::parse(z.as_bytes()), Err(Error::Format { line: 1, .. })));
    }

    #[test]
    fn zero_magnitude_stays_parseable() {
        let f = [1e9];
        let s = [[Complex64::new(0.0, 0.0); 4]];
        let file = Touchstone::from_parameters(&f, &s, FrequencyUnit::GHz, DataFormat::Db);
        let mut buf = Vec::new();
        file.write(&mut buf).unwrap();
        let back = Touchstone::parse(buf.as_slice()).unwrap();
        assert!(back.parameters(0)[1].norm() < 1e-300);
    }

    #[test]
    fn unit_scaling() {
        for (unit, scale) in [("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)] {
            let text = format!("# {unit} S MA R 50\n2 0 0 1 0 1 0 0 0\n");
            let trace = parse_touchstone(text.as_bytes()).unwrap();
            assert_eq!(trace.frequencies[0], 2.0 * scale);
        }
    }

    fn arb_file() -> impl Strategy<Value = Touchstone> {
        let fmt = prop_oneof![Just(DataFormat::Db), Just(DataFormat::Ma), Just(DataFormat::Ri)];
        let unit = prop_oneof![
            Just(FrequencyUnit::Hz),
            Just(FrequencyUnit::KHz),
            Just(FrequencyUnit::MHz),
            Just(FrequencyUnit::GHz)
        ];
        (fmt, unit, 1usize..20, prop::collection::vec(prop::array::uniform8(-1e3f64..1e3), 20), 0.1f64..100.0)
            .prop_map(|(format, unit, n, rows, start)| Touchstone {
                unit,
                format,
                reference_ohms: 50.0,
                frequencies: (0..n).map(|i| start + i as f64 * 0.5).collect(),
                data: rows[..n].to_vec(),
            })
    }

    proptest! {
        #[test]
        fn serialize_parse_is_identity(file in arb_file()) {
            let mut buf = Vec::new();
            file.write(&mut buf).unwrap();
            let back = Touchstone::parse(buf.as_slice()).unwrap();
            prop_assert_eq!(back, file);
        }
    }
}
