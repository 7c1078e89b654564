//! Text formats shared across the crate: the `x,y,t` point CSV and
//! round-trippable number formatting.

use crate::error::{Error, Result};
use crate::heis::HeisPoint;
use std::io::{Read, Write};

/// Formats `v` with 17 significant digits, which round-trips every `f64`.
///
/// Fixed notation is used for moderate magnitudes, scientific otherwise.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.0000000000000000".into();
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..16).contains(&exp) {
        let decimals = (16 - exp) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.16e}")
    }
}

pub const POINT_CSV_HEADER: &str = "x,y,t";

pub fn write_points_csv<W: Write>(mut out: W, points: &[HeisPoint]) -> Result<()> {
    writeln!(out, "{POINT_CSV_HEADER}")?;
    for p in points {
        writeln!(out, "{},{},{}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.t))?;
    }
    Ok(())
}

pub fn points_to_csv(points: &[HeisPoint]) -> String {
    let mut buf = Vec::new();
    write_points_csv(&mut buf, points).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<HeisPoint>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let columns: Vec<&str> = headers.iter().collect();
    if columns != ["x", "y", "t"] {
        return Err(Error::InvalidArgument(format!("expected header `x,y,t`, found `{}`", columns.join(","))));
    }
    let mut points = Vec::new();
    for record in reader.deserialize() {
        let (x, y, t): (f64, f64, f64) = record?;
        let p = HeisPoint::new(x, y, t);
        if !p.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite point {p}")));
        }
        points.push(p);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for v in [1.0, -0.1, 1.0 / 3.0, 12345.678, 1e-9, -7.5e20, 2f64.sqrt(), f64::MIN_POSITIVE, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000");
    }

    #[test]
    fn csv_round_trip() {
        let pts = vec![HeisPoint::new(0.1, -2.0, 1.0 / 7.0), HeisPoint::new(1e-12, 3e5, -0.0)];
        let text = points_to_csv(&pts);
        assert!(text.starts_with("x,y,t\n"));
        assert_eq!(read_points_csv(text.as_bytes()).unwrap(), pts);
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(read_points_csv("a,b,c\n1,2,3\n".as_bytes()).is_err());
    }
}
