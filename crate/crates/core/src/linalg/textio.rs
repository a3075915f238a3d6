//! Matrix text format and the state-spec grammar used by the CLI.
//!
//! File format: first line `dim d`, then d rows of d whitespace-separated
//! complex entries written as `a+bi`. Named constructors: `bell`, `bell^m`,
//! `isotropic:p:m`, `pure:l1,l2,...` (Schmidt vector), `maxmix:d`.

use std::path::Path;

use num_complex::Complex64;

use super::layout::BipartitionLayout;
use super::op::{CMat, HermitianOperator};
use super::states::{isotropic, max_entangled, maximally_mixed, pure_from_schmidt, DensityMatrix};
use crate::error::{Error, Result};

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty complex entry".into()));
    }
    let bad = || Error::Parse(format!("cannot parse complex entry '{s}'"));
    if let Some(body) = s.strip_suffix('i') {
        // pure imaginary or a+bi / a-bi
        // find the split sign that is not a leading sign or exponent sign
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for k in (1..chars.len()).rev() {
            let c = chars[k];
            if (c == '+' || c == '-') && chars[k - 1] != 'e' && chars[k - 1] != 'E' {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = body[..k].parse().map_err(|_| bad())?;
                let imag_str = &body[k..];
                let im: f64 = match imag_str {
                    "+" => 1.0,
                    "-" => -1.0,
                    _ => imag_str.parse().map_err(|_| bad())?,
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im: f64 = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    _ => body.parse().map_err(|_| bad())?,
                };
                Ok(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, 0.0))
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im >= 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

pub fn parse_matrix_text(text: &str) -> Result<CMat> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let mut parts = header.split_whitespace();
    match (parts.next(), parts.next()) {
        (Some("dim"), Some(dstr)) => {
            let d: usize = dstr
                .parse()
                .map_err(|_| Error::Parse(format!("bad dimension '{dstr}'")))?;
            let mut m = CMat::zeros(d, d);
            for r in 0..d {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::Parse(format!("missing matrix row {r}")))?;
                let entries: Vec<&str> = line.split_whitespace().collect();
                if entries.len() != d {
                    return Err(Error::Parse(format!(
                        "row {r} has {} entries, expected {d}",
                        entries.len()
                    )));
                }
                for (c, e) in entries.iter().enumerate() {
                    m[(r, c)] = parse_complex(e)?;
                }
            }
            Ok(m)
        }
        _ => Err(Error::Parse("matrix file must start with 'dim d'".into())),
    }
}

pub fn write_matrix_text(m: &CMat) -> String {
    let d = m.nrows();
    let mut out = format!("dim {d}\n");
    for r in 0..d {
        let row: Vec<String> = (0..d).map(|c| format_complex(m[(r, c)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Pick a canonical bipartition for a bare total dimension: qubit pairs when
/// d = 4^n, otherwise a square d = k*k split, otherwise k:1.
pub fn layout_for_dim(d: usize) -> Result<BipartitionLayout> {
    let mut n = 0usize;
    let mut x = d;
    while x % 4 == 0 {
        x /= 4;
        n += 1;
    }
    if x == 1 && n >= 1 {
        return BipartitionLayout::qubit_pairs(n);
    }
    let k = (d as f64).sqrt().round() as usize;
    if k * k == d {
        return BipartitionLayout::new(k, k, 1);
    }
    BipartitionLayout::new(d, 1, 1)
}

/// Parse a state spec: a named constructor or a path to a matrix text file.
pub fn parse_state_spec(spec: &str) -> Result<DensityMatrix> {
    let spec = spec.trim();
    if spec == "bell" {
        return max_entangled(1);
    }
    if let Some(mstr) = spec.strip_prefix("bell^") {
        let m: usize = mstr
            .parse()
            .map_err(|_| Error::Parse(format!("bad copy count in '{spec}'")))?;
        return max_entangled(m);
    }
    if let Some(rest) = spec.strip_prefix("isotropic:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("expected isotropic:p:m, got '{spec}'")));
        }
        let p: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad weight in '{spec}'")))?;
        let m: usize = parts[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad copy count in '{spec}'")))?;
        return isotropic(p, m);
    }
    if let Some(rest) = spec.strip_prefix("pure:") {
        let lambdas: Result<Vec<f64>> = rest
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad Schmidt coefficient '{s}'")))
            })
            .collect();
        return pure_from_schmidt(&lambdas?);
    }
    if let Some(dstr) = spec.strip_prefix("maxmix:") {
        let d: usize = dstr
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension in '{spec}'")))?;
        return Ok(maximally_mixed(layout_for_dim(d)?));
    }
    if Path::new(spec).exists() {
        let text = std::fs::read_to_string(spec)?;
        let m = parse_matrix_text(&text)?;
        let layout = layout_for_dim(m.nrows())?;
        return DensityMatrix::new(HermitianOperator::new(m, layout)?);
    }
    Err(Error::Parse(format!(
        "unrecognized state spec '{spec}' (not a named constructor or readable file)"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trip() {
        for s in ["1+2i", "0.5-0.25i", "-3+0i", "2i", "-i", "4"] {
            let z = parse_complex(s).unwrap();
            let z2 = parse_complex(&format_complex(z)).unwrap();
            assert!((z - z2).norm() < 1e-15, "{s}");
        }
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let phi = max_entangled(1).unwrap();
        let text = write_matrix_text(phi.matrix());
        let back = parse_matrix_text(&text).unwrap();
        let err = (phi.matrix() - back).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-15);
    }

    #[test]
    fn named_constructors() {
        assert_eq!(parse_state_spec("bell").unwrap().dim(), 4);
        assert_eq!(parse_state_spec("bell^2").unwrap().dim(), 16);
        assert_eq!(parse_state_spec("isotropic:0.5:1").unwrap().dim(), 4);
        assert_eq!(parse_state_spec("pure:0.8,0.2").unwrap().dim(), 4);
        assert_eq!(parse_state_spec("maxmix:4").unwrap().dim(), 4);
        assert!(parse_state_spec("nonsense").is_err());
    }
}
