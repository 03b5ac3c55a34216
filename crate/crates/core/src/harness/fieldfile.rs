//! `IFLD1` field files.
//!
//! A file is an ASCII header followed by the payload:
//!
//! ```text
//! IFLD1
//! variable: <name>
//! units: <units>
//! t_index: <solver step>
//! dims: <ny> <nx>          (or <n> for a line)
//! spacing: <dy> <dx>       (same order as dims)
//! time: <model time>
//! experiment: <id>
//! seed: <u64>
//! payload: <byte count>
//! <empty line>
//! <row-major f64 little-endian values>
//! ```
//!
//! Masked points are stored as NaN. Numbers are written in Rust's shortest
//! round-trip form, so headers and payloads both decode bit-exactly.

use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &str = "IFLD1";

#[derive(Debug, Clone, PartialEq)]
pub struct FieldHeader {
    pub variable: String,
    pub units: String,
    pub t_index: u64,
    /// Slowest-varying first: `[ny, nx]` or `[n]`.
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub time: f64,
    pub experiment: String,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct FieldFile {
    pub header: FieldHeader,
    pub data: Vec<f64>,
}

impl PartialEq for FieldFile {
    /// Bitwise payload comparison, so NaN masks compare equal.
    fn eq(&self, other: &Self) -> bool {
        self.header == other.header
            && self.data.len() == other.data.len()
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

const KEYS: [&str; 9] = [
    "variable",
    "units",
    "t_index",
    "dims",
    "spacing",
    "time",
    "experiment",
    "seed",
    "payload",
];

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn encode(f: &FieldFile) -> Result<Vec<u8>> {
    let h = &f.header;
    for (name, s) in [
        ("variable", &h.variable),
        ("units", &h.units),
        ("experiment", &h.experiment),
    ] {
        if s.is_empty() || s.chars().any(|c| c.is_control()) || s.trim() != s {
            return Err(Error::config(format!(
                "header {name} '{s}' must be non-empty single-line text"
            )));
        }
    }
    let count: usize = h.dims.iter().product();
    if h.dims.is_empty() || count != f.data.len() || h.spacing.len() != h.dims.len() {
        return Err(Error::config(format!(
            "dims {:?} / spacing {:?} do not describe {} values",
            h.dims,
            h.spacing,
            f.data.len()
        )));
    }
    let text = format!(
        "{MAGIC}\nvariable: {}\nunits: {}\nt_index: {}\ndims: {}\nspacing: {}\ntime: {}\nexperiment: {}\nseed: {}\npayload: {}\n\n",
        h.variable,
        h.units,
        h.t_index,
        join(&h.dims),
        join(&h.spacing),
        h.time,
        h.experiment,
        h.seed,
        count * 8
    );
    let mut out = text.into_bytes();
    out.reserve(count * 8);
    for v in &f.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<FieldFile> {
    let mut pos = 0;
    let next_line = |pos: &mut usize| -> Result<(usize, String)> {
        let start = *pos;
        let end = bytes[start..]
            .iter()
            .position(|b| *b == b'\n')
            .ok_or_else(|| Error::format(start, "unterminated header line"))?;
        let line = std::str::from_utf8(&bytes[start..start + end])
            .map_err(|_| Error::format(start, "header line is not UTF-8"))?;
        *pos = start + end + 1;
        Ok((start, line.to_string()))
    };
    let (at, magic) = next_line(&mut pos)?;
    if magic != MAGIC {
        return Err(Error::format(
            at,
            format!("expected magic {MAGIC}, found '{magic}'"),
        ));
    }
    let mut values: Vec<(usize, String)> = Vec::with_capacity(KEYS.len());
    for key in KEYS {
        let (at, line) = next_line(&mut pos)?;
        let rest = line
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(": "))
            .ok_or_else(|| Error::format(at, format!("expected '{key}: ...', found '{line}'")))?;
        values.push((at + key.len() + 2, rest.to_string()));
    }
    let (at, blank) = next_line(&mut pos)?;
    if !blank.is_empty() {
        return Err(Error::format(at, "header must end with an empty line"));
    }
    fn num<T: std::str::FromStr>(at: usize, s: &str, what: &str) -> Result<T> {
        s.parse()
            .map_err(|_| Error::format(at, format!("bad {what} '{s}'")))
    }
    fn list<T: std::str::FromStr>(at: usize, s: &str, what: &str) -> Result<Vec<T>> {
        s.split(' ').map(|t| num(at, t, what)).collect()
    }
    let v = |i: usize| (values[i].0, values[i].1.as_str());
    let (a, s) = v(2);
    let t_index = num(a, s, "t_index")?;
    let (a_dims, s) = v(3);
    let dims: Vec<usize> = list(a_dims, s, "dims")?;
    let (a, s) = v(4);
    let spacing: Vec<f64> = list(a, s, "spacing")?;
    if dims.is_empty() || spacing.len() != dims.len() {
        return Err(Error::format(a, "spacing must match dims"));
    }
    let (a, s) = v(5);
    let time = num(a, s, "time")?;
    let (a, s) = v(7);
    let seed = num(a, s, "seed")?;
    let (a_pay, s) = v(8);
    let payload: usize = num(a_pay, s, "payload")?;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(*d))
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::format(a_dims, "dims overflow"))?;
    if payload != count {
        return Err(Error::format(
            a_pay,
            format!("payload {payload} bytes does not match dims {dims:?} ({count} bytes)"),
        ));
    }
    let body = &bytes[pos..];
    if body.len() != count {
        return Err(Error::format(
            pos,
            format!("payload has {} bytes, header promises {count}", body.len()),
        ));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(FieldFile {
        header: FieldHeader {
            variable: values[0].1.clone(),
            units: values[1].1.clone(),
            t_index,
            dims,
            spacing,
            time,
            experiment: values[6].1.clone(),
            seed,
        },
        data,
    })
}

pub fn write_field(path: &Path, f: &FieldFile) -> Result<()> {
    std::fs::write(path, encode(f)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(ny: usize, nx: usize) -> FieldFile {
        FieldFile {
            header: FieldHeader {
                variable: "information_h".into(),
                units: "nat".into(),
                t_index: 600,
                dims: vec![ny, nx],
                spacing: vec![1.0e5, 1.0e5],
                time: 36_000.0,
                experiment: "sw_blob".into(),
                seed: u64::MAX,
            },
            data: (0..ny * nx)
                .map(|k| (k as f64 * 0.37).sin() / 3.0)
                .collect(),
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample(50, 254);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.ifld");
        write_field(&path, &f).unwrap();
        let g = read_field(&path).unwrap();
        assert_eq!(g, f);
        assert_eq!(encode(&g).unwrap(), std::fs::read(&path).unwrap());
    }

    #[test]
    fn masked_points_round_trip() {
        let mut f = sample(8, 8);
        f.data[3] = f64::NAN;
        f.header.time = 0.1 + 0.2;
        let g = decode(&encode(&f).unwrap()).unwrap();
        assert!(g.data[3].is_nan());
        assert_eq!(g.header.time.to_bits(), (0.1f64 + 0.2).to_bits());
        assert_eq!(g, f);
    }

    #[test]
    fn short_payload_is_a_format_error() {
        let f = sample(50, 254);
        let mut bytes = encode(&f).unwrap();
        bytes.truncate(bytes.len() - 254 * 8);
        let err = decode(&bytes).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn header_errors_report_offsets() {
        let f = sample(8, 8);
        let good = encode(&f).unwrap();
        let text = String::from_utf8_lossy(&good[..good.len() - 512]).to_string();
        let bad = text.replace("dims: 8 8", "dims: 8 x");
        match decode(bad.as_bytes()) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, text.find("8 8").unwrap()),
            other => panic!("{other:?}"),
        }
        match decode(b"IFLD2\n") {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
        let lied = text.replace("payload: 512", "payload: 504");
        assert!(matches!(decode(lied.as_bytes()), Err(Error::Format { .. })));
    }

    #[test]
    fn one_dimensional_fields() {
        let f = FieldFile {
            header: FieldHeader {
                dims: vec![1024],
                spacing: vec![0.1777],
                ..sample(1, 1).header
            },
            data: vec![1.5; 1024],
        };
        assert_eq!(decode(&encode(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn inconsistent_fields_are_refused() {
        let mut f = sample(4, 4);
        f.data.pop();
        assert!(encode(&f).is_err());
        let mut f = sample(4, 4);
        f.header.units = "m\ns".into();
        assert!(encode(&f).is_err());
    }
}
