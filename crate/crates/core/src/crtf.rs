//! `CRTF` grid file format.
//!
//! ```text
//! "CRTF" | u32 version=1 | u32 dtype (0 real f64, 1 complex128) | u32 ndim
//! ndim x u64 dims | ndim x f64 origin | ndim x f64 spacing | payload
//! ```
//!
//! Everything is little-endian; the payload is row-major with the last axis
//! fastest and complex values interleaved as `re, im`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField, SpectralField};

pub const MAGIC: [u8; 4] = *b"CRTF";
pub const VERSION: u32 = 1;

const MAX_NDIM: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Dtype {
    Real = 0,
    Complex = 1,
}

/// Contents of a `CRTF` file.
#[derive(Debug, Clone)]
pub enum GridData {
    Real(ScalarField),
    Complex(SpectralField),
}

fn write_header<W: Write>(w: &mut W, spec: &GridSpec, dtype: Dtype) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(dtype as u32).to_le_bytes())?;
    w.write_all(&(spec.ndim() as u32).to_le_bytes())?;
    for &d in spec.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for &o in spec.origin() {
        w.write_all(&o.to_le_bytes())?;
    }
    for &s in spec.spacing() {
        w.write_all(&s.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_real<W: Write>(w: &mut W, field: &ScalarField) -> Result<()> {
    write_header(w, field.spec(), Dtype::Real)?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_complex<W: Write>(w: &mut W, field: &SpectralField) -> Result<()> {
    write_header(w, field.spec(), Dtype::Complex)?;
    for c in field.coeffs() {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn read<R: Read>(r: &mut R) -> Result<GridData> {
    let mut magic = [0; 4];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dtype = match read_u32(r)? {
        0 => Dtype::Real,
        1 => Dtype::Complex,
        d => return Err(Error::Format(format!("unknown dtype {d}"))),
    };
    let ndim = read_u32(r)?;
    if ndim == 0 || ndim > MAX_NDIM {
        return Err(Error::Format(format!("unsupported ndim {ndim}")));
    }
    let ndim = ndim as usize;
    let mut dims = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        let d = read_u64(r)?;
        dims.push(
            usize::try_from(d).map_err(|_| Error::Format(format!("dimension {d} too large")))?,
        );
    }
    let origin = (0..ndim).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    let spacing = (0..ndim).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    let spec = GridSpec::new(dims, origin, spacing).map_err(|e| Error::Format(e.to_string()))?;
    let n = spec.len();
    match dtype {
        Dtype::Real => {
            let values = (0..n).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
            Ok(GridData::Real(ScalarField::new(spec, values)?))
        }
        Dtype::Complex => {
            let coeffs = (0..n)
                .map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(GridData::Complex(SpectralField::new(spec, coeffs)?))
        }
    }
}

pub fn save_real(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_real(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn save_complex(path: &Path, field: &SpectralField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_complex(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<GridData> {
    read(&mut BufReader::new(File::open(path)?))
}

/// Load a file that must hold a real field.
pub fn load_real(path: &Path) -> Result<ScalarField> {
    match load(path)? {
        GridData::Real(f) => Ok(f),
        GridData::Complex(_) => Err(Error::Format(format!(
            "{} holds complex data",
            path.display()
        ))),
    }
}
