//! Sampled fields on uniform grids and their Fourier transforms.
//!
//! Layout is row-major with the last axis (`z`) fastest. A grid with `n + 1`
//! axes represents `(x_1, ..., x_n, z)`.
//!
//! The forward transform approximates `F f(xi) = int f(x) e^{-i xi . x} dx`
//! by a Riemann sum over physical sample coordinates, so the phase
//! `e^{-i xi . origin}` is folded into the coefficients and spectral
//! multipliers can be evaluated directly at physical frequencies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft;

/// Default relative amplitude threshold for support detection.
pub const DEFAULT_EPS_SUPPORT: f64 = 1e-6;

/// Uniform sampling of an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    dims: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
}

impl GridSpec {
    pub fn new(dims: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Invalid(format!(
                "grid needs at least 2 axes, got {}",
                dims.len()
            )));
        }
        if origin.len() != dims.len() || spacing.len() != dims.len() {
            return Err(Error::Invalid(
                "dims, origin and spacing must have equal length".into(),
            ));
        }
        if let Some(a) = dims.iter().position(|&d| d < 2) {
            return Err(Error::Invalid(format!("axis {a} has fewer than 2 samples")));
        }
        if let Some(a) = spacing.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::Invalid(format!(
                "axis {a} spacing must be positive and finite"
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::Invalid("origin must be finite".into()));
        }
        Ok(GridSpec {
            dims,
            origin,
            spacing,
        })
    }

    /// `dims[a]` samples covering `[lo[a], hi[a])` with spacing `(hi - lo) / dims`.
    pub fn from_extent(dims: &[usize], lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != dims.len() || hi.len() != dims.len() {
            return Err(Error::Invalid(
                "extent must give one (lo, hi) pair per axis".into(),
            ));
        }
        let spacing = dims
            .iter()
            .zip(lo.iter().zip(hi))
            .map(|(&n, (l, h))| (h - l) / n as f64)
            .collect();
        Self::new(dims.to_vec(), lo.to_vec(), spacing)
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Index of the `z` axis.
    pub fn z_axis(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    pub fn axis_coords(&self, axis: usize) -> Vec<f64> {
        (0..self.dims[axis]).map(|i| self.coord(axis, i)).collect()
    }

    /// Coordinate of the last sample on `axis`.
    pub fn upper(&self, axis: usize) -> f64 {
        self.coord(axis, self.dims[axis] - 1)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// `prod(dims * spacing)`, the volume of the periodic cell.
    pub fn domain_volume(&self) -> f64 {
        self.dims
            .iter()
            .zip(&self.spacing)
            .map(|(&n, s)| n as f64 * s)
            .product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for a in (0..self.dims.len() - 1).rev() {
            s[a] = s[a + 1] * self.dims[a + 1];
        }
        s
    }

    /// Multi-index of a flat offset.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dims.len()).rev() {
            out[a] = flat % self.dims[a];
            flat /= self.dims[a];
        }
    }

    /// Signed angular frequencies `2 pi k / (N h)` for each axis, in FFT order.
    pub fn frequency_axes(&self) -> Vec<Vec<f64>> {
        (0..self.ndim())
            .map(|a| {
                let n = self.dims[a];
                let scale = 2.0 * PI / (n as f64 * self.spacing[a]);
                (0..n).map(|k| signed_index(k, n) as f64 * scale).collect()
            })
            .collect()
    }

    fn same_geometry(&self, other: &GridSpec) -> bool {
        self.dims == other.dims
            && self
                .spacing
                .iter()
                .zip(&other.spacing)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs())
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .zip(&self.spacing)
                .all(|((a, b), s)| (a - b).abs() <= 1e-9 * s)
    }
}

fn signed_index(k: usize, n: usize) -> i64 {
    if k <= (n - 1) / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn is_nyquist(k: usize, n: usize) -> bool {
    n.is_multiple_of(2) && k == n / 2
}

/// Real samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::Invalid(format!(
                "expected {} samples, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("field contains non-finite samples".into()));
        }
        Ok(ScalarField { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        let n = spec.len();
        ScalarField {
            spec,
            values: vec![0.0; n],
        }
    }

    /// Evaluate `f` at every sample's physical coordinates.
    pub fn from_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let nz = spec.dims()[spec.z_axis()];
        let mut values = vec![0.0; spec.len()];
        values
            .par_chunks_mut(nz)
            .enumerate()
            .for_each(|(line, out)| {
                let mut idx = vec![0; spec.ndim()];
                spec.unravel(line * nz, &mut idx);
                let mut p: Vec<f64> = (0..spec.ndim()).map(|a| spec.coord(a, idx[a])).collect();
                let za = spec.z_axis();
                for (k, v) in out.iter_mut().enumerate() {
                    p[za] = spec.coord(za, k);
                    *v = f(&p);
                }
            });
        ScalarField { spec, values }
    }

    pub(crate) fn from_parts_unchecked(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(spec.len(), values.len());
        ScalarField { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn map<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> Self {
        ScalarField {
            spec: self.spec.clone(),
            values: self.values.par_iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with<F: Fn(f64, f64) -> f64 + Sync>(
        &self,
        other: &ScalarField,
        f: F,
    ) -> Result<Self> {
        if !self.spec.same_geometry(&other.spec) {
            return Err(Error::Alignment("fields live on different grids".into()));
        }
        Ok(ScalarField {
            spec: self.spec.clone(),
            values: self
                .values
                .par_iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `||self - reference||_2 / ||reference||_2`.
    pub fn rel_l2_error(&self, reference: &ScalarField) -> Result<f64> {
        let diff = norms(&self.sub(reference)?).l2;
        let base = norms(reference).l2;
        Ok(if base == 0.0 { diff } else { diff / base })
    }

    /// Value at a multi-index.
    pub fn at(&self, idx: &[usize]) -> f64 {
        let s = self.spec.strides();
        self.values[idx.iter().zip(&s).map(|(i, s)| i * s).sum::<usize>()]
    }
}

/// Complex Fourier coefficients of a [`ScalarField`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
    freq_axes: Vec<Vec<f64>>,
}

impl SpectralField {
    pub fn new(spec: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != spec.len() {
            return Err(Error::Invalid(format!(
                "expected {} coefficients, got {}",
                spec.len(),
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Invalid(
                "spectrum contains non-finite coefficients".into(),
            ));
        }
        let freq_axes = spec.frequency_axes();
        Ok(SpectralField {
            spec,
            coeffs,
            freq_axes,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn freq_axes(&self) -> &[Vec<f64>] {
        &self.freq_axes
    }

    /// Multiply every coefficient by `symbol(frequency)`.
    ///
    /// On even-length axes the Nyquist bin has no conjugate partner, so a
    /// complex symbol there would make the output complex. At any bin on a
    /// Nyquist plane the symbol is replaced by its modulus. The modulus is
    /// multiplicative, so products and powers of symbols compose exactly as
    /// they do elsewhere. Real output needs `|s|` to be even in every
    /// frequency component, which holds for symbols that depend on `|xi|`
    /// and satisfy `s(xi, -sigma) = conj(s(xi, sigma))`.
    pub fn apply_symbol<S>(&mut self, symbol: S)
    where
        S: Fn(&[f64]) -> Complex64 + Sync,
    {
        let spec = &self.spec;
        let freqs = &self.freq_axes;
        let nz = spec.dims()[spec.z_axis()];
        self.coeffs
            .par_chunks_mut(nz)
            .enumerate()
            .for_each(|(line, out)| {
                let mut idx = vec![0; spec.ndim()];
                spec.unravel(line * nz, &mut idx);
                let za = spec.z_axis();
                let mut w: Vec<f64> = (0..spec.ndim()).map(|a| freqs[a][idx[a]]).collect();
                let line_nyquist = (0..za).any(|a| is_nyquist(idx[a], spec.dims()[a]));
                for (k, c) in out.iter_mut().enumerate() {
                    w[za] = freqs[za][k];
                    *c *= effective_symbol(&symbol, &w, line_nyquist || is_nyquist(k, nz));
                }
            });
    }

    /// Whether the bin at `idx` lies on a Nyquist plane of some axis.
    pub fn on_nyquist_plane(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(self.spec.dims())
            .any(|(&k, &n)| is_nyquist(k, n))
    }
}

/// The value [`SpectralField::apply_symbol`] multiplies by.
pub fn effective_symbol<S: Fn(&[f64]) -> Complex64>(
    symbol: &S,
    w: &[f64],
    nyquist: bool,
) -> Complex64 {
    let s = symbol(w);
    if nyquist {
        Complex64::new(s.norm(), 0.0)
    } else {
        s
    }
}

/// Per-axis phase `e^{-i xi origin}` times the Riemann-sum cell volume.
fn phase_tables(spec: &GridSpec, sign: f64) -> Vec<Vec<Complex64>> {
    spec.frequency_axes()
        .iter()
        .enumerate()
        .map(|(a, xi)| {
            xi.iter()
                .map(|w| Complex64::from_polar(1.0, sign * w * spec.origin()[a]))
                .collect()
        })
        .collect()
}

fn apply_separable(data: &mut [Complex64], spec: &GridSpec, tables: &[Vec<Complex64>], scale: f64) {
    let nz = spec.dims()[spec.z_axis()];
    let za = spec.z_axis();
    data.par_chunks_mut(nz).enumerate().for_each(|(line, out)| {
        let mut idx = vec![0; spec.ndim()];
        spec.unravel(line * nz, &mut idx);
        let mut base = Complex64::new(scale, 0.0);
        for a in 0..za {
            base *= tables[a][idx[a]];
        }
        for (k, c) in out.iter_mut().enumerate() {
            *c *= base * tables[za][k];
        }
    });
}

/// Continuous-FT approximation `sum_j f(x_j) e^{-i xi . x_j} prod(spacing)`.
pub fn dft_forward(field: &ScalarField) -> SpectralField {
    let spec = field.spec().clone();
    let mut data: Vec<Complex64> = field
        .values()
        .par_iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft::transform(&mut data, spec.dims(), FftDirection::Forward);
    let tables = phase_tables(&spec, -1.0);
    apply_separable(&mut data, &spec, &tables, spec.cell_volume());
    let freq_axes = spec.frequency_axes();
    SpectralField {
        spec,
        coeffs: data,
        freq_axes,
    }
}

/// Relative imaginary residue above which [`dft_inverse`] refuses.
pub const SYMMETRY_LIMIT: f64 = 1e-6;

/// Exact discrete inverse of [`dft_forward`]. The imaginary part of the
/// result is checked against [`SYMMETRY_LIMIT`] and then discarded.
pub fn dft_inverse(spectrum: &SpectralField) -> Result<ScalarField> {
    let (values, residue) = inverse_with_residue(spectrum.spec(), spectrum.coeffs().to_vec());
    if residue > SYMMETRY_LIMIT {
        return Err(Error::Symmetry {
            residue,
            limit: SYMMETRY_LIMIT,
        });
    }
    Ok(ScalarField::from_parts_unchecked(
        spectrum.spec().clone(),
        values,
    ))
}

/// Consuming variant used by the operator pipelines to avoid a copy.
pub(crate) fn dft_inverse_owned(spectrum: SpectralField) -> Result<ScalarField> {
    let SpectralField { spec, coeffs, .. } = spectrum;
    let (values, residue) = inverse_with_residue(&spec, coeffs);
    if residue > SYMMETRY_LIMIT {
        return Err(Error::Symmetry {
            residue,
            limit: SYMMETRY_LIMIT,
        });
    }
    Ok(ScalarField::from_parts_unchecked(spec, values))
}

fn inverse_with_residue(spec: &GridSpec, mut data: Vec<Complex64>) -> (Vec<f64>, f64) {
    let tables = phase_tables(spec, 1.0);
    apply_separable(
        &mut data,
        spec,
        &tables,
        1.0 / (spec.cell_volume() * spec.len() as f64),
    );
    fft::transform(&mut data, spec.dims(), FftDirection::Inverse);
    let (max_re, max_im) = data
        .par_iter()
        .map(|c| (c.re.abs(), c.im.abs()))
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let residue = if max_re > 0.0 {
        max_im / max_re
    } else if max_im > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    (data.into_par_iter().map(|c| c.re).collect(), residue)
}

/// How far to enlarge a grid before a periodic spectral operation.
#[derive(Debug, Clone, PartialEq)]
pub struct PadSpec {
    /// Total size multiplier per axis, each `>= 1`.
    pub factors: Vec<f64>,
    /// Extra length added below the grid on the `z` axis.
    pub z_margin: f64,
}

impl PadSpec {
    pub fn new(factors: Vec<f64>) -> Result<Self> {
        if let Some(f) = factors.iter().find(|f| !(**f >= 1.0) || !f.is_finite()) {
            return Err(Error::Invalid(format!("pad factors must be >= 1, got {f}")));
        }
        Ok(PadSpec {
            factors,
            z_margin: 0.0,
        })
    }

    pub fn uniform(ndim: usize, factor: f64) -> Result<Self> {
        Self::new(vec![factor; ndim])
    }

    /// No padding: the field is treated as one period of a periodic function.
    pub fn none(ndim: usize) -> Self {
        PadSpec {
            factors: vec![1.0; ndim],
            z_margin: 0.0,
        }
    }

    pub fn with_z_margin(mut self, margin: f64) -> Result<Self> {
        if !(margin >= 0.0) || !margin.is_finite() {
            return Err(Error::Invalid(format!(
                "z margin must be >= 0, got {margin}"
            )));
        }
        self.z_margin = margin;
        Ok(self)
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|&f| f == 1.0) && self.z_margin == 0.0
    }

    /// Padded grid and the number of samples inserted before the original
    /// data on each axis.
    pub fn plan(&self, spec: &GridSpec) -> Result<(GridSpec, Vec<usize>)> {
        if self.factors.len() != spec.ndim() {
            return Err(Error::Invalid(format!(
                "{} pad factors for a {}-axis grid",
                self.factors.len(),
                spec.ndim()
            )));
        }
        let za = spec.z_axis();
        let mut dims = Vec::with_capacity(spec.ndim());
        let mut before = Vec::with_capacity(spec.ndim());
        for a in 0..spec.ndim() {
            let n = spec.dims()[a];
            let margin = if a == za {
                (self.z_margin / spec.spacing()[a]).ceil() as usize
            } else {
                0
            };
            let base = (self.factors[a] * n as f64).ceil() as usize;
            if base == n && margin == 0 {
                dims.push(n);
                before.push(0);
                continue;
            }
            let total = fft::next_fast_len(base + margin);
            let rest = total - n - margin;
            // margin and the larger half of the remainder go below on z
            let lead = if a == za {
                margin + rest - rest / 2
            } else {
                rest / 2
            };
            dims.push(total);
            before.push(lead);
        }
        let origin = (0..spec.ndim())
            .map(|a| spec.origin()[a] - before[a] as f64 * spec.spacing()[a])
            .collect();
        Ok((
            GridSpec::new(dims, origin, spec.spacing().to_vec())?,
            before,
        ))
    }
}

/// Enlarge `field` per `pad`, filling new samples with `fill`. Original
/// samples keep their physical coordinates.
pub fn pad(field: &ScalarField, pad: &PadSpec, fill: f64) -> Result<ScalarField> {
    let (target, before) = pad.plan(field.spec())?;
    Ok(embed(field, target, &before, fill))
}

fn embed(field: &ScalarField, target: GridSpec, before: &[usize], fill: f64) -> ScalarField {
    let src = field.spec();
    let nz_src = src.dims()[src.z_axis()];
    let nz_dst = target.dims()[target.z_axis()];
    let dst_strides = target.strides();
    let mut values = vec![fill; target.len()];
    let za = src.z_axis();
    // copy source lines into place; each destination line is written once
    let lines: Vec<(usize, usize)> = (0..src.len() / nz_src)
        .map(|line| {
            let mut idx = vec![0; src.ndim()];
            src.unravel(line * nz_src, &mut idx);
            let off: usize = (0..za)
                .map(|a| (idx[a] + before[a]) * dst_strides[a])
                .sum::<usize>()
                + before[za];
            (line * nz_src, off)
        })
        .collect();
    for (s, d) in lines {
        values[d..d + nz_src].copy_from_slice(&field.values()[s..s + nz_src]);
    }
    debug_assert!(nz_dst >= nz_src);
    ScalarField::from_parts_unchecked(target, values)
}

fn offsets_within(outer: &GridSpec, inner: &GridSpec) -> Result<Vec<usize>> {
    if outer.ndim() != inner.ndim() {
        return Err(Error::Alignment(
            "grids have different numbers of axes".into(),
        ));
    }
    let mut offsets = Vec::with_capacity(outer.ndim());
    for a in 0..outer.ndim() {
        let (hs, ht) = (outer.spacing()[a], inner.spacing()[a]);
        if (hs - ht).abs() > 1e-9 * hs {
            return Err(Error::Alignment(format!(
                "axis {a} spacing {ht} differs from {hs}"
            )));
        }
        let shift = (inner.origin()[a] - outer.origin()[a]) / hs;
        let rounded = shift.round();
        if (shift - rounded).abs() > 1e-6 || rounded < 0.0 {
            return Err(Error::Alignment(format!(
                "axis {a} origin is not on the source lattice"
            )));
        }
        let off = rounded as usize;
        if off + inner.dims()[a] > outer.dims()[a] {
            return Err(Error::Alignment(format!(
                "axis {a} extends past the source grid"
            )));
        }
        offsets.push(off);
    }
    Ok(offsets)
}

/// Restrict `field` to the commensurate sub-grid `target`.
pub fn crop(field: &ScalarField, target: &GridSpec) -> Result<ScalarField> {
    let offsets = offsets_within(field.spec(), target)?;
    let src = field.spec();
    let src_strides = src.strides();
    let za = target.z_axis();
    let nz = target.dims()[za];
    let mut values = vec![0.0; target.len()];
    values
        .par_chunks_mut(nz)
        .enumerate()
        .for_each(|(line, out)| {
            let mut idx = vec![0; target.ndim()];
            target.unravel(line * nz, &mut idx);
            let off: usize = (0..za)
                .map(|a| (idx[a] + offsets[a]) * src_strides[a])
                .sum::<usize>()
                + offsets[za];
            out.copy_from_slice(&field.values()[off..off + nz]);
        });
    // keep the target's exact origin so repeated pad/crop cycles do not drift
    Ok(ScalarField::from_parts_unchecked(target.clone(), values))
}

/// Sub-grid of `spec` covering the samples whose coordinates lie in
/// `[lo, hi]` (with a small tolerance) on every axis.
pub fn window_spec(spec: &GridSpec, lo: &[f64], hi: &[f64]) -> Result<GridSpec> {
    if lo.len() != spec.ndim() || hi.len() != spec.ndim() {
        return Err(Error::Invalid(
            "window bounds must have one entry per axis".into(),
        ));
    }
    let mut dims = Vec::new();
    let mut origin = Vec::new();
    for a in 0..spec.ndim() {
        let h = spec.spacing()[a];
        let first = ((lo[a] - spec.origin()[a]) / h - 1e-9).ceil().max(0.0) as usize;
        let last_f = ((hi[a] - spec.origin()[a]) / h + 1e-9).floor();
        if last_f < 0.0 {
            return Err(Error::Invalid(format!(
                "window misses the grid on axis {a}"
            )));
        }
        let last = (last_f as usize).min(spec.dims()[a] - 1);
        if last < first + 1 {
            return Err(Error::Invalid(format!(
                "window covers fewer than 2 samples on axis {a}"
            )));
        }
        dims.push(last - first + 1);
        origin.push(spec.coord(a, first));
    }
    GridSpec::new(dims, origin, spec.spacing().to_vec())
}

/// Axis-aligned bounding box of the samples above a relative threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub threshold: f64,
}

impl SupportBox {
    pub fn contains_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        self.lo.iter().zip(lo).all(|(a, b)| a >= b) && self.hi.iter().zip(hi).all(|(a, b)| a <= b)
    }
}

/// Tight bounding box of `|v| > eps * max|v|`; `None` for an all-zero field.
pub fn support_box(field: &ScalarField, eps: f64) -> Result<Option<SupportBox>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Invalid(format!(
            "support threshold must lie in (0, 1), got {eps}"
        )));
    }
    let max = field.max_abs();
    if max == 0.0 {
        return Ok(None);
    }
    let cut = eps * max;
    let spec = field.spec();
    let nd = spec.ndim();
    let nz = spec.dims()[spec.z_axis()];
    let (lo_idx, hi_idx) = field
        .values()
        .par_chunks(nz)
        .enumerate()
        .fold(
            || (vec![usize::MAX; nd], vec![0usize; nd]),
            |(mut lo, mut hi), (line, vals)| {
                let first = vals.iter().position(|v| v.abs() > cut);
                if let Some(first) = first {
                    let last = vals
                        .iter()
                        .rposition(|v| v.abs() > cut)
                        .expect("first exists");
                    let mut idx = vec![0; nd];
                    spec.unravel(line * nz, &mut idx);
                    for a in 0..nd - 1 {
                        lo[a] = lo[a].min(idx[a]);
                        hi[a] = hi[a].max(idx[a]);
                    }
                    lo[nd - 1] = lo[nd - 1].min(first);
                    hi[nd - 1] = hi[nd - 1].max(last);
                }
                (lo, hi)
            },
        )
        .reduce(
            || (vec![usize::MAX; nd], vec![0usize; nd]),
            |a, b| {
                (
                    a.0.iter().zip(&b.0).map(|(x, y)| *x.min(y)).collect(),
                    a.1.iter().zip(&b.1).map(|(x, y)| *x.max(y)).collect(),
                )
            },
        );
    Ok(Some(SupportBox {
        lo: (0..nd).map(|a| spec.coord(a, lo_idx[a])).collect(),
        hi: (0..nd).map(|a| spec.coord(a, hi_idx[a])).collect(),
        threshold: eps,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub linf: f64,
}

/// Riemann-sum `L^2` norm and maximum modulus.
pub fn norms(field: &ScalarField) -> Norms {
    let sum_sq: f64 = field.values().iter().map(|v| v * v).sum();
    Norms {
        l2: (sum_sq * field.spec().cell_volume()).sqrt(),
        linf: field.max_abs(),
    }
}

/// Largest `|value|` on the two faces of `axis`, relative to the field maximum.
pub fn boundary_amplitude(field: &ScalarField, axis: usize) -> f64 {
    let max = field.max_abs();
    if max == 0.0 {
        return 0.0;
    }
    let spec = field.spec();
    let n = spec.dims()[axis];
    let mut idx = vec![0; spec.ndim()];
    let mut edge = 0.0_f64;
    for (flat, v) in field.values().iter().enumerate() {
        spec.unravel(flat, &mut idx);
        if idx[axis] == 0 || idx[axis] == n - 1 {
            edge = edge.max(v.abs());
        }
    }
    edge / max
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid2(n0: usize, n1: usize) -> GridSpec {
        GridSpec::new(vec![n0, n1], vec![-1.3, 0.4], vec![0.1, 0.05]).unwrap()
    }

    fn pseudo_random(spec: &GridSpec, seed: u64) -> ScalarField {
        let mut s = seed;
        let values = (0..spec.len())
            .map(|_| {
                s = s
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect();
        ScalarField::new(spec.clone(), values).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(vec![4], vec![0.0], vec![1.0]).is_err());
        assert!(GridSpec::new(vec![4, 1], vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(GridSpec::new(vec![4, 4], vec![0.0, 0.0], vec![1.0, 0.0]).is_err());
        let g = GridSpec::from_extent(&[256, 256], &[-2.0, -2.0], &[2.0, 2.0]).unwrap();
        assert_eq!(g.spacing(), &[4.0 / 256.0, 4.0 / 256.0]);
        assert_eq!(g.coord(0, 128), 0.0);
    }

    #[test]
    fn constant_field_zero_frequency() {
        let g = grid2(12, 10);
        let f = ScalarField::from_fn(g.clone(), |_| 2.5);
        let s = dft_forward(&f);
        let expect = 2.5 * g.domain_volume();
        assert!((s.coeffs()[0] - Complex64::new(expect, 0.0)).norm() < 1e-12 * expect);
    }

    #[test]
    fn pure_tone_has_two_real_bins() {
        let g = grid2(8, 16);
        let xi0 = 2.0 * PI * 3.0 / (16.0 * 0.05);
        let f = ScalarField::from_fn(g.clone(), |p| (xi0 * p[1]).cos());
        let s = dft_forward(&f);
        let half = g.domain_volume() / 2.0;
        // physical coordinates: no residual phase from the grid origin
        assert!((s.coeffs()[3] - half).norm() < 1e-12);
        assert!((s.coeffs()[13] - half).norm() < 1e-12);
        let rest: f64 = s
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 3 && *i != 13)
            .map(|(_, c)| c.norm())
            .sum();
        assert!(rest < 1e-11);
    }

    #[test]
    fn zero_spectrum_inverts_to_zero() {
        let g = grid2(6, 6);
        let s = SpectralField::new(g.clone(), vec![Complex64::new(0.0, 0.0); 36]).unwrap();
        assert_eq!(dft_inverse(&s).unwrap(), ScalarField::zeros(g));
    }

    #[test]
    fn impulse_inverts_to_plane_wave() {
        let g = grid2(6, 8);
        let mut c = vec![Complex64::new(0.0, 0.0); 48];
        // (k0, k1) = (1, 2) and its conjugate partner keep the output real
        c[8 + 2] = Complex64::new(1.0, 0.0);
        c[5 * 8 + 6] = Complex64::new(1.0, 0.0);
        let s = SpectralField::new(g.clone(), c).unwrap();
        let f = dft_inverse(&s).unwrap();
        let xi = [s.freq_axes()[0][1], s.freq_axes()[1][2]];
        let norm = g.cell_volume() * g.len() as f64;
        for (flat, v) in f.values().iter().enumerate() {
            let mut idx = [0; 2];
            g.unravel(flat, &mut idx);
            let x = [g.coord(0, idx[0]), g.coord(1, idx[1])];
            let expect = 2.0 * (xi[0] * x[0] + xi[1] * x[1]).cos() / norm;
            assert!((v - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let g = grid2(6, 8);
        let mut c = vec![Complex64::new(0.0, 0.0); 48];
        c[8 + 2] = Complex64::new(1.0, 0.0);
        let s = SpectralField::new(g, c).unwrap();
        assert!(matches!(dft_inverse(&s), Err(Error::Symmetry { .. })));
    }

    #[test]
    fn parseval_and_conjugate_symmetry() {
        let g = GridSpec::new(vec![9, 12, 10], vec![0.3, -1.0, 2.0], vec![0.2, 0.1, 0.07]).unwrap();
        let f = pseudo_random(&g, 7);
        let s = dft_forward(&f);
        let dfreq: f64 = (0..3)
            .map(|a| 2.0 * PI / (g.dims()[a] as f64 * g.spacing()[a]))
            .product();
        let lhs: f64 =
            s.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>() * dfreq / (2.0 * PI).powi(3);
        let rhs: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        // partner of k is -k mod N; Nyquist bins carry a one-sided phase
        let dims = g.dims();
        let mut idx = [0; 3];
        for flat in 0..g.len() {
            g.unravel(flat, &mut idx);
            if (0..3).any(|a| is_nyquist(idx[a], dims[a])) {
                continue;
            }
            let p: Vec<usize> = (0..3).map(|a| (dims[a] - idx[a]) % dims[a]).collect();
            let pf = (p[0] * dims[1] + p[1]) * dims[2] + p[2];
            let (c, d) = (s.coeffs()[flat], s.coeffs()[pf]);
            assert!((c - d.conj()).norm() <= 1e-12 * c.norm().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn nyquist_modulus_keeps_output_real() {
        let g = grid2(8, 8);
        let f = pseudo_random(&g, 3);
        let mut s = dft_forward(&f);
        s.apply_symbol(|w| Complex64::new(1.0, -w[1]).powi(3));
        assert!(dft_inverse(&s).is_ok());
    }

    #[test]
    fn pad_preserves_coordinates_and_norm() {
        let g = grid2(10, 12);
        let f = pseudo_random(&g, 11);
        let p = PadSpec::uniform(2, 2.0)
            .unwrap()
            .with_z_margin(0.33)
            .unwrap();
        let padded = pad(&f, &p, 0.0).unwrap();
        let (spec, before) = p.plan(&g).unwrap();
        assert_eq!(padded.spec(), &spec);
        assert_eq!(before[0], 5);
        // margin 0.33 / 0.05 -> 7 samples, plus the larger half of the rest
        assert!(before[1] >= 7 + (spec.dims()[1] - 12 - 7) / 2);
        for i in 0..10 {
            for k in 0..12 {
                assert_eq!(padded.at(&[i + before[0], k + before[1]]), f.at(&[i, k]));
                assert!((spec.coord(0, i + before[0]) - g.coord(0, i)).abs() < 1e-12);
            }
        }
        assert!((norms(&padded).l2 - norms(&f).l2).abs() < 1e-12);
        let back = crop(&padded, &g).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn zero_padding_zero_field() {
        let g = grid2(4, 4);
        let padded = pad(
            &ScalarField::zeros(g),
            &PadSpec::uniform(2, 3.0).unwrap(),
            0.0,
        )
        .unwrap();
        assert!(padded.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn crop_identity_and_misaligned() {
        let g = grid2(6, 6);
        let f = pseudo_random(&g, 5);
        assert_eq!(crop(&f, &g).unwrap(), f);
        let c = ScalarField::from_fn(g.clone(), |_| 4.0);
        let sub = GridSpec::new(
            vec![3, 2],
            vec![g.coord(0, 1), g.coord(1, 3)],
            g.spacing().to_vec(),
        )
        .unwrap();
        assert!(crop(&c, &sub).unwrap().values().iter().all(|&v| v == 4.0));
        let off = GridSpec::new(
            vec![3, 2],
            vec![g.coord(0, 1) + 0.03, g.coord(1, 3)],
            g.spacing().to_vec(),
        )
        .unwrap();
        assert!(matches!(crop(&c, &off), Err(Error::Alignment(_))));
        let wide = GridSpec::new(vec![7, 2], g.origin().to_vec(), g.spacing().to_vec()).unwrap();
        assert!(matches!(crop(&c, &wide), Err(Error::Alignment(_))));
    }

    #[test]
    fn support_box_cases() {
        let g = GridSpec::from_extent(&[20, 20], &[-2.0, -2.0], &[2.0, 2.0]).unwrap();
        assert_eq!(
            support_box(&ScalarField::zeros(g.clone()), 1e-6).unwrap(),
            None
        );
        let c = ScalarField::from_fn(g.clone(), |_| 1.0);
        let b = support_box(&c, 1e-6).unwrap().unwrap();
        assert_eq!(b.lo, vec![-2.0, -2.0]);
        assert_eq!(b.hi, vec![g.upper(0), g.upper(1)]);
        let blob = ScalarField::from_fn(g.clone(), |p| {
            if p[0].abs() <= 0.5 && (p[1] - 1.0).abs() <= 0.2 {
                1.0
            } else {
                0.0
            }
        });
        let b = support_box(&blob, 1e-6).unwrap().unwrap();
        assert!((b.lo[0] + 0.4).abs() < 1e-12 && (b.hi[0] - 0.4).abs() < 1e-12);
        assert!(support_box(&blob, 0.0).is_err());
    }

    #[test]
    fn norms_cases() {
        let g = grid2(5, 5);
        assert_eq!(
            norms(&ScalarField::zeros(g.clone())),
            Norms { l2: 0.0, linf: 0.0 }
        );
        let mut v = vec![0.0; 25];
        v[7] = 3.0;
        let f = ScalarField::new(g.clone(), v).unwrap();
        let n = norms(&f);
        assert!((n.l2 - 3.0 * g.cell_volume().sqrt()).abs() < 1e-15);
        assert_eq!(n.linf, 3.0);
        let m = norms(&f.scaled(-2.0));
        assert!((m.l2 - 2.0 * n.l2).abs() < 1e-15 && m.linf == 6.0);
    }

    #[test]
    fn window_spec_snaps_inward() {
        let g = GridSpec::from_extent(&[40, 40], &[-2.0, -2.0], &[2.0, 2.0]).unwrap();
        let w = window_spec(&g, &[-1.0, -0.95], &[1.0, 0.5]).unwrap();
        assert!((w.origin()[0] + 1.0).abs() < 1e-12 && (w.origin()[1] + 0.9).abs() < 1e-12);
        assert!((w.upper(0) - 1.0).abs() < 1e-12 && (w.upper(1) - 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn dft_round_trip(n0 in 2usize..9, n1 in 2usize..11, seed in 0u64..1000) {
            let g = grid2(n0, n1);
            let f = pseudo_random(&g, seed);
            let back = dft_inverse(&dft_forward(&f)).unwrap();
            let err = back.sub(&f).unwrap().max_abs() / f.max_abs();
            prop_assert!(err <= 1e-12);
        }

        #[test]
        fn pad_crop_round_trip(n0 in 2usize..9, n1 in 2usize..9, f0 in 1.0f64..3.0, f1 in 1.0f64..3.0, m in 0.0f64..0.4) {
            let g = grid2(n0, n1);
            let f = pseudo_random(&g, 1);
            let p = PadSpec::new(vec![f0, f1]).unwrap().with_z_margin(m).unwrap();
            let back = crop(&pad(&f, &p, 0.0).unwrap(), &g).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
