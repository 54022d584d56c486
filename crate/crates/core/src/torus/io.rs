//! Binary and CSV serialization of torus fields.
//!
//! Binary layout, all little-endian: four `u64` header words
//! `(d, L, kind, n)` with `kind` 0 for scalar and 1 for matrix, then every
//! complex entry as `(re, im)` `f64` pairs in storage order.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{site_count, TorusField, ValueKind, DEFAULT_SITE_BUDGET};
use crate::error::{Error, Result};

pub fn write_binary(field: &TorusField, mut w: impl Write) -> Result<()> {
    let (kind, n) = match field.kind() {
        ValueKind::Scalar => (0u64, 1u64),
        ValueKind::Matrix(n) => (1, n as u64),
    };
    for word in [field.dim() as u64, field.side() as u64, kind, n] {
        w.write_all(&word.to_le_bytes())?;
    }
    for v in field.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

pub fn read_binary(mut r: impl Read) -> Result<TorusField> {
    let dim = read_u64(&mut r)? as usize;
    let side = read_u64(&mut r)? as usize;
    let kind = match (read_u64(&mut r)?, read_u64(&mut r)?) {
        (0, _) => ValueKind::Scalar,
        (1, n) if n > 0 => ValueKind::Matrix(n as usize),
        (k, n) => return Err(Error::Parse(format!("bad value kind ({k}, {n})"))),
    };
    let sites = site_count(dim, side, DEFAULT_SITE_BUDGET)?;
    let len = sites * kind.fiber_len();
    let mut values = Vec::with_capacity(len);
    for _ in 0..len {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        values.push(Complex64::new(re, im));
    }
    TorusField::new(dim, side, kind, values)
}

/// Header `x0,...,x{d-1},re,im`, one row per site.
pub fn write_csv(field: &TorusField, mut w: impl Write) -> Result<()> {
    if field.kind() != ValueKind::Scalar {
        return Err(Error::Shape(
            "CSV export is defined for scalar fields only".into(),
        ));
    }
    let header: Vec<String> = (0..field.dim())
        .map(|j| format!("x{j}"))
        .chain(["re".to_string(), "im".to_string()])
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (site, v) in field.values().iter().enumerate() {
        let coords: Vec<String> = field
            .site_coords(site)
            .iter()
            .map(|c| c.to_string())
            .collect();
        writeln!(w, "{},{:e},{:e}", coords.join(","), v.re, v.im)?;
    }
    w.flush()?;
    Ok(())
}
