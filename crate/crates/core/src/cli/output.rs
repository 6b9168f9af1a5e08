//! Tabular output: coordinates plus value, whole field or slices.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use log::warn;

use conerad::fields::ScalarField;
use conerad::{Error, Result};

/// Whole-field CSV is skipped above this many samples unless slices are asked for.
const FULL_CSV_LIMIT: usize = 1 << 20;

/// `axis=value`: fix `axis` at the sample nearest `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice {
    pub axis: usize,
    pub value: f64,
}

impl FromStr for Slice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("slice must look like axis=value, got '{s}'"));
        let (a, v) = s.split_once('=').ok_or_else(bad)?;
        Ok(Slice {
            axis: a.trim().parse().map_err(|_| bad())?,
            value: v.trim().parse().map_err(|_| bad())?,
        })
    }
}

fn nearest(field: &ScalarField, s: &Slice) -> Result<usize> {
    let spec = field.spec();
    if s.axis >= spec.ndim() {
        return Err(Error::Invalid(format!(
            "slice axis {} out of range for {} axes",
            s.axis,
            spec.ndim()
        )));
    }
    let h = spec.spacing()[s.axis];
    let i = ((s.value - spec.origin()[s.axis]) / h).round();
    if !(i >= 0.0 && i < spec.dims()[s.axis] as f64) {
        return Err(Error::Invalid(format!(
            "slice value {} lies outside axis {}",
            s.value, s.axis
        )));
    }
    Ok(i as usize)
}

/// Rows `x0,...,x{d-1},value` for the samples whose fixed axes match.
fn write_rows(path: &Path, field: &ScalarField, fixed: &[(usize, usize)]) -> Result<()> {
    let spec = field.spec();
    let d = spec.ndim();
    let mut w = BufWriter::new(File::create(path)?);
    let header: Vec<String> = (0..d)
        .map(|a| format!("x{a}"))
        .chain(["value".to_string()])
        .collect();
    writeln!(w, "{}", header.join(","))?;
    let mut idx = vec![0; d];
    for (flat, v) in field.values().iter().enumerate() {
        spec.unravel(flat, &mut idx);
        if fixed.iter().any(|&(a, i)| idx[a] != i) {
            continue;
        }
        for (a, &i) in idx.iter().enumerate() {
            write!(w, "{},", spec.coord(a, i))?;
        }
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

/// `name.csv` for the whole field (if small enough) and, when slices are
/// given, `name_slice.csv` with every slice applied together.
pub fn write_csv(dir: &Path, name: &str, field: &ScalarField, slices: &[Slice]) -> Result<()> {
    if slices.is_empty() {
        if field.values().len() > FULL_CSV_LIMIT {
            warn!(
                "{name}: {} samples, skipping whole-field CSV (use --slice)",
                field.values().len()
            );
            return Ok(());
        }
        return write_rows(&dir.join(format!("{name}.csv")), field, &[]);
    }
    let fixed = slices
        .iter()
        .map(|s| Ok((s.axis, nearest(field, s)?)))
        .collect::<Result<Vec<_>>>()?;
    write_rows(&dir.join(format!("{name}_slice.csv")), field, &fixed)
}
