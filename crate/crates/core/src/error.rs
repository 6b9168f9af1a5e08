use std::io;

use thiserror::Error;

/// Errors produced by the numerical library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// `J_{-1/2}` evaluated at the origin.
    #[error("singularity: {0}")]
    Singularity(String),

    /// Field data that should be conjugate-symmetric in frequency is not.
    #[error("symmetry error: relative imaginary residue {residue:.3e} exceeds {limit:.1e}")]
    Symmetry { residue: f64, limit: f64 },

    /// The field does not decay at a boundary where zero padding is applied.
    #[error("boundary contamination on axis {axis}: edge amplitude {relative:.3e} of max exceeds {limit:.1e}")]
    BoundaryContamination {
        axis: usize,
        relative: f64,
        limit: f64,
    },

    /// Two grids that should line up sample-for-sample do not.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Direct quadrature cannot reach all of the phantom support.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Finite-difference stencil does not fit on the grid.
    #[error("stencil error: axis {axis} has {len} samples, need at least {need}")]
    Stencil {
        axis: usize,
        len: usize,
        need: usize,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the filesystem rather than by the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}
