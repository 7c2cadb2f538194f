//! `freq_hz,s21_db,s21_deg` trace tables.

use std::io::{BufRead, Write};

use super::{from_db_deg, to_db_deg, ResonanceTrace};
use crate::error::{Error, Result};

pub fn parse_csv_trace<R: BufRead>(source: R) -> Result<ResonanceTrace> {
    let mut header_seen = false;
    let mut freqs = Vec::new();
    let mut s21 = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            let cols: Vec<&str> = line.trim_start_matches('\u{feff}').split(',').map(str::trim).collect();
            if cols != ["freq_hz", "s21_db", "s21_deg"] {
                return Err(Error::format(lineno, format!("expected header freq_hz,s21_db,s21_deg, got '{line}'")));
            }
            header_seen = true;
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 3 {
            return Err(Error::format(lineno, format!("expected 3 columns, got {}", cells.len())));
        }
        let mut v = [0.0; 3];
        for (slot, cell) in v.iter_mut().zip(&cells) {
            *slot = cell
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::format(lineno, format!("not a number: '{cell}'")))?;
        }
        if freqs.last().is_some_and(|&prev| !(v[0] > prev)) {
            return Err(Error::format(lineno, "frequencies must be strictly increasing"));
        }
        freqs.push(v[0]);
        s21.push(from_db_deg(v[1], v[2]));
    }
    if !header_seen {
        return Err(Error::NoData("trace file is empty".into()));
    }
    if freqs.is_empty() {
        return Err(Error::NoData("trace file has a header but no samples".into()));
    }
    ResonanceTrace::new(freqs, s21, "csv")
}

pub fn write_csv_trace<W: Write>(trace: &ResonanceTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "freq_hz,s21_db,s21_deg")?;
    for (f, s) in trace.frequencies.iter().zip(&trace.s21) {
        let (db, deg) = to_db_deg(*s);
        writeln!(out, "{f},{db},{deg}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file() {
        let text = "freq_hz,s21_db,s21_deg\n1e9,-20,45\n2e9,-40,0\n3e9,0,-90\n";
        let t = parse_csv_trace(text.as_bytes()).unwrap();
        assert_eq!(t.frequencies, vec![1e9, 2e9, 3e9]);
        assert_eq!(t.s21[1], from_db_deg(-40.0, 0.0));
        let (db, deg) = to_db_deg(t.s21[0]);
        assert!((db + 20.0).abs() < 1e-12 && (deg - 45.0).abs() < 1e-12);
        assert!((t.s21[2].norm() - 1.0).abs() < 1e-15);
        let crlf = text.replace('\n', "\r\n");
        assert_eq!(parse_csv_trace(crlf.as_bytes()).unwrap(), t);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_csv_trace("freq_hz,s21_db\n".as_bytes()), Err(Error::Format { line: 1, .. })));
        let bad = "freq_hz,s21_db,s21_deg\n1,2,3\n2,x,3\n";
        assert!(matches!(parse_csv_trace(bad.as_bytes()), Err(Error::Format { line: 3, .. })));
        assert!(matches!(parse_csv_trace("freq_hz,s21_db,s21_deg\n".as_bytes()), Err(Error::NoData(_))));
        assert!(matches!(parse_csv_trace("".as_bytes()), Err(Error::NoData(_))));
    }

    #[test]
    fn write_round_trip() {
        let text = "freq_hz,s21_db,s21_deg\n1e9,-20,45\n2e9,-40,10\n";
        let t = parse_csv_trace(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_csv_trace(&t, &mut buf).unwrap();
        let back = parse_csv_trace(buf.as_slice()).unwrap();
        for (a, b) in t.s21.iter().zip(&back.s21) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
