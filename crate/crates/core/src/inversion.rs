//! Reconstruction of `f` from range data.
//!
//! ```text
//! c-odd:   f =  alpha^{-1}        R[L^k g]
//! c-even:  f = (alpha beta)^{-1}  R[L^{2k} A g]
//! a-odd:   f =  beta^{-1}         L^{k-1} g
//! a-even:  f =  beta^{-2}         L^{2k-1} A g
//! ```
//!
//! `R[h](z) = -e^{az} int_{-inf}^z e^{-a tau} h dtau`. When `h` has vanishing
//! exponential moment this equals `int_z^inf e^{-a (tau - z)} h dtau`, which
//! is what gets evaluated: sweeping down from the top of the grid only ever
//! multiplies by `e^{-a dz} < 1`, while the bottom-up form amplifies
//! roundoff by `e^{a * height}`.

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Result;
use crate::fields::{boundary_amplitude, crop, effective_symbol, GridSpec, PadSpec, ScalarField};
use crate::rangeops::{
    fd_derivative, range_operator, Theorem, DEFAULT_EPS_SUPPORT, DEFAULT_MOMENT_TOL,
};
use crate::transforms::{aux_symbol, cone_symbol, TransformParams};

/// Running trapezoid of `e^{-a tau} h(x, tau)` from the bottom of each
/// column up to every `z`.
pub fn cumulative_weighted_integral(
    h: &ScalarField,
    params: &TransformParams,
) -> Result<ScalarField> {
    params.check_grid(h.spec())?;
    let spec = h.spec();
    let za = spec.z_axis();
    let nz = spec.dims()[za];
    let dz = spec.spacing()[za];
    let weight: Vec<f64> = (0..nz)
        .map(|j| (-params.a() * spec.coord(za, j)).exp())
        .collect();
    let mut out = vec![0.0; spec.len()];
    out.par_chunks_mut(nz)
        .zip(h.values().par_chunks(nz))
        .for_each(|(o, col)| {
            let mut acc = 0.0;
            for j in 1..nz {
                acc += 0.5 * dz * (weight[j - 1] * col[j - 1] + weight[j] * col[j]);
                o[j] = acc;
            }
        });
    Ok(ScalarField::from_parts_unchecked(spec.clone(), out))
}

/// `int_z^{top} e^{-a (tau - z)} h(x, tau) dtau` per column: trapezoid swept
/// downwards plus the Euler–Maclaurin term at the lower end. The upper end
/// is assumed to be where `h` has decayed.
pub fn downward_resolvent(h: &ScalarField, params: &TransformParams) -> Result<ScalarField> {
    params.check_grid(h.spec())?;
    let spec = h.spec();
    let za = spec.z_axis();
    let nz = spec.dims()[za];
    let dz = spec.spacing()[za];
    let a = params.a();
    let decay = (-a * dz).exp();
    let dh = if nz >= 5 {
        fd_derivative(h, za, false)
    } else {
        vec![0.0; h.values().len()]
    };
    let mut out = vec![0.0; spec.len()];
    out.par_chunks_mut(nz)
        .zip(h.values().par_chunks(nz))
        .zip(dh.par_chunks(nz))
        .for_each(|((o, col), d)| {
            let mut acc = 0.0;
            o[nz - 1] = 0.0;
            for j in (0..nz - 1).rev() {
                acc = decay * acc + 0.5 * dz * (col[j] + decay * col[j + 1]);
                o[j] = acc + dz * dz / 12.0 * (d[j] - a * col[j]);
            }
        });
    Ok(ScalarField::from_parts_unchecked(spec.clone(), out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionDiagnostics {
    /// Largest face amplitude of the reconstruction relative to its maximum.
    pub boundary_decay: f64,
    pub padding: PadSpec,
    /// Grid on which the operators acted.
    pub working_dims: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub f_hat: ScalarField,
    pub rel_l2_error: Option<f64>,
    pub diagnostics: InversionDiagnostics,
}

impl ReconstructionResult {
    /// Relative `L^2` error against `truth`, after cropping the
    /// reconstruction to `truth`'s grid.
    pub fn compare(mut self, truth: &ScalarField) -> Result<Self> {
        let fit = if self.f_hat.spec() == truth.spec() {
            self.f_hat.clone()
        } else {
            crop(&self.f_hat, truth.spec())?
        };
        self.rel_l2_error = Some(fit.rel_l2_error(truth)?);
        Ok(self)
    }

    /// The reconstruction restricted to `spec`.
    pub fn cropped(&self, spec: &GridSpec) -> Result<ScalarField> {
        crop(&self.f_hat, spec)
    }
}

/// Reconstruct `f` from `g` along the path of `theorem`.
pub fn invert(
    g: &ScalarField,
    params: &TransformParams,
    theorem: Theorem,
    padding: &PadSpec,
) -> Result<ReconstructionResult> {
    let h = range_operator(g, params, theorem, padding, DEFAULT_EPS_SUPPORT)?;
    let f_hat = match theorem {
        Theorem::COdd => downward_resolvent(&h, params)?.scaled(1.0 / params.alpha()),
        Theorem::CEven => {
            downward_resolvent(&h, params)?.scaled(1.0 / (params.alpha() * params.beta()?))
        }
        Theorem::AOdd => h.scaled(1.0 / params.beta()?),
        Theorem::AEven => h.scaled(1.0 / params.beta()?.powi(2)),
    };
    let boundary_decay = (0..f_hat.spec().ndim())
        .map(|a| boundary_amplitude(&f_hat, a))
        .fold(0.0, f64::max);
    if boundary_decay > 10.0 * DEFAULT_MOMENT_TOL {
        warn!("{theorem} reconstruction does not decay at the grid boundary ({boundary_decay:.2e}); data may be outside the range");
    }
    let (working, _) = padding.plan(g.spec())?;
    Ok(ReconstructionResult {
        f_hat,
        rel_l2_error: None,
        diagnostics: InversionDiagnostics {
            boundary_decay,
            padding: padding.clone(),
            working_dims: working.dims().to_vec(),
        },
    })
}

pub fn invert_c_odd(
    g: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ReconstructionResult> {
    invert(g, params, Theorem::COdd, padding)
}

pub fn invert_c_even(
    g: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ReconstructionResult> {
    invert(g, params, Theorem::CEven, padding)
}

pub fn invert_a_odd(
    g: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ReconstructionResult> {
    invert(g, params, Theorem::AOdd, padding)
}

pub fn invert_a_even(
    g: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ReconstructionResult> {
    invert(g, params, Theorem::AEven, padding)
}

/// Largest `|forward * inverse - 1|` over the frequency bins of `spec`, where
/// `forward` is the symbol of the transform the path inverts and `inverse`
/// the product of the path's stages. Each factor is taken as the grid
/// applies it (modulus on Nyquist planes).
pub fn composed_symbol_residual(
    theorem: Theorem,
    params: &TransformParams,
    spec: &GridSpec,
) -> Result<f64> {
    params.check_grid(spec)?;
    let chain = theorem.symbol(params)?;
    let alpha = params.alpha();
    let a = params.a();
    let cone = cone_symbol(params);
    let aux = if params.n >= 2 {
        Some(aux_symbol(params)?)
    } else {
        None
    };
    let constant = match theorem {
        Theorem::COdd => alpha,
        Theorem::CEven => alpha * params.beta()?,
        Theorem::AOdd => params.beta()?,
        Theorem::AEven => params.beta()?.powi(2),
    };
    let freqs = spec.frequency_axes();
    let dims = spec.dims();
    let nd = spec.ndim();
    let worst = (0..spec.len())
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0; nd];
            spec.unravel(flat, &mut idx);
            let w: Vec<f64> = (0..nd).map(|ax| freqs[ax][idx[ax]]).collect();
            let nyq = idx
                .iter()
                .zip(dims)
                .any(|(&k, &n)| n % 2 == 0 && k == n / 2);
            let forward = match theorem {
                Theorem::COdd | Theorem::CEven => effective_symbol(&cone, &w, nyq),
                Theorem::AOdd | Theorem::AEven => {
                    effective_symbol(aux.as_ref().expect("n >= 2"), &w, nyq)
                }
            };
            let mut back = effective_symbol(&chain, &w, nyq) / constant;
            if theorem.has_moment_condition() {
                let integral = |w: &[f64]| 1.0 / Complex64::new(a, -w[nd - 1]);
                back *= effective_symbol(&integral, &w, nyq);
            }
            (forward * back - 1.0).norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
