//! The operator `L = a^2 - 2a d_z + d_zz - t^2 Lap_x`, the exponential moment
//! functional, and the four range tests.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{
    boundary_amplitude, crop, support_box, window_spec, GridSpec, PadSpec, ScalarField, SupportBox,
};
use crate::transforms::{apply_on_padded, half_power, TransformParams};

pub const DEFAULT_EPS_SUPPORT: f64 = crate::fields::DEFAULT_EPS_SUPPORT;
pub const DEFAULT_MOMENT_TOL: f64 = 1e-4;

/// Edge amplitude, in units of the support threshold, tolerated on padded axes.
const BOUNDARY_FACTOR: f64 = 100.0;

/// Which range characterization a check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    /// `C` data, odd `n`: `L^k g` compact with vanishing moment.
    COdd,
    /// `C` data, even `n`: `L^{2k} A g` compact with vanishing moment.
    CEven,
    /// `A` data, odd `n >= 3`: `L^{k-1} g` compact.
    AOdd,
    /// `A` data, even `n`: `L^{2k-1} A g` compact.
    AEven,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [Theorem::COdd, Theorem::CEven, Theorem::AOdd, Theorem::AEven];

    pub fn has_moment_condition(self) -> bool {
        matches!(self, Theorem::COdd | Theorem::CEven)
    }

    /// The check that applies to data of this kind in dimension `n`.
    pub fn for_data(cone: bool, n: usize) -> Theorem {
        match (cone, n % 2 == 1) {
            (true, true) => Theorem::COdd,
            (true, false) => Theorem::CEven,
            (false, true) => Theorem::AOdd,
            (false, false) => Theorem::AEven,
        }
    }

    fn require(self, params: &TransformParams) -> Result<()> {
        let odd = params.n % 2 == 1;
        match self {
            Theorem::COdd | Theorem::AOdd if !odd => {
                return Err(Error::Domain(format!(
                    "{self} needs odd n, got {}",
                    params.n
                )))
            }
            Theorem::CEven | Theorem::AEven if odd => {
                return Err(Error::Domain(format!(
                    "{self} needs even n, got {}",
                    params.n
                )))
            }
            _ => {}
        }
        if self == Theorem::AOdd && params.n == 1 {
            return Err(Error::Domain("a-odd is undefined for n = 1".into()));
        }
        Ok(())
    }

    /// Symbol of the operator producing `h` from `g`, as a single product.
    pub(crate) fn symbol(
        self,
        params: &TransformParams,
    ) -> Result<impl Fn(&[f64]) -> Complex64 + Sync + '_> {
        self.require(params)?;
        let k = params.k() as i32;
        // half-integer exponent of P and the constant in front
        let (twice_power, scale) = match self {
            Theorem::COdd => (2 * k, 1.0),
            Theorem::AOdd => (2 * (k - 1), 1.0),
            // P^{2k} * beta P^{-(n-1)/2} with n = 2k
            Theorem::CEven => (2 * k + 1, params.beta()?),
            // P^{2k-1} * beta P^{-(n-1)/2}
            Theorem::AEven => (2 * k - 1, params.beta()?),
        };
        Ok(move |w: &[f64]| scale * half_power(params.l_symbol_at(w), twice_power))
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::COdd => "c-odd",
            Theorem::CEven => "c-even",
            Theorem::AOdd => "a-odd",
            Theorem::AEven => "a-even",
        })
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c-odd" => Ok(Theorem::COdd),
            "c-even" => Ok(Theorem::CEven),
            "a-odd" => Ok(Theorem::AOdd),
            "a-even" => Ok(Theorem::AEven),
            other => Err(Error::Invalid(format!(
                "unknown theorem '{other}' (c-odd, c-even, a-odd, a-even)"
            ))),
        }
    }
}

/// Fails if `g` does not decay at the faces of axes that `padding` enlarges.
/// Zero-filling a field that is still large at its edge would wrap a jump
/// into every spectral derivative.
pub(crate) fn check_boundary(g: &ScalarField, padding: &PadSpec, eps_support: f64) -> Result<()> {
    let (padded, _) = padding.plan(g.spec())?;
    let limit = BOUNDARY_FACTOR * eps_support;
    for axis in 0..g.spec().ndim() {
        if padded.dims()[axis] == g.spec().dims()[axis] {
            continue;
        }
        let relative = boundary_amplitude(g, axis);
        if relative > limit {
            return Err(Error::BoundaryContamination {
                axis,
                relative,
                limit,
            });
        }
    }
    Ok(())
}

fn apply_checked<S>(
    g: &ScalarField,
    padding: &PadSpec,
    eps_support: f64,
    symbol: S,
) -> Result<ScalarField>
where
    S: Fn(&[f64]) -> Complex64 + Sync,
{
    check_boundary(g, padding, eps_support)?;
    let out = apply_on_padded(g, padding, symbol)?;
    if padding.is_identity() {
        Ok(out)
    } else {
        crop(&out, g.spec())
    }
}

/// `L^k g` through the symbol `P^k`, raised once.
pub fn l_apply_spectral(
    g: &ScalarField,
    params: &TransformParams,
    k: u32,
    padding: &PadSpec,
) -> Result<ScalarField> {
    l_apply_spectral_eps(g, params, k, padding, DEFAULT_EPS_SUPPORT)
}

/// [`l_apply_spectral`] with an explicit support threshold for the
/// boundary check.
pub fn l_apply_spectral_eps(
    g: &ScalarField,
    params: &TransformParams,
    k: u32,
    padding: &PadSpec,
    eps_support: f64,
) -> Result<ScalarField> {
    params.check_grid(g.spec())?;
    if k == 0 {
        return Err(Error::Invalid("power of L must be at least 1".into()));
    }
    let k = i32::try_from(k).map_err(|_| Error::Invalid("power of L too large".into()))?;
    apply_checked(g, padding, eps_support, |w| params.l_symbol_at(w).powi(k))
}

/// Operator of `theorem` applied to `g`: `L^k`, `L^{k-1}`, or the fused
/// `L^{2k} A` / `L^{2k-1} A`.
pub fn range_operator(
    g: &ScalarField,
    params: &TransformParams,
    theorem: Theorem,
    padding: &PadSpec,
    eps_support: f64,
) -> Result<ScalarField> {
    params.check_grid(g.spec())?;
    let symbol = theorem.symbol(params)?;
    if theorem == Theorem::AOdd && params.k() == 1 {
        unreachable!("n = 1 rejected above");
    }
    apply_checked(g, padding, eps_support, symbol)
}

const FD_MIN: usize = 5;

/// Derivative along `axis`: 4th-order central in the interior, 2nd-order
/// at the two samples next to each face.
pub(crate) fn fd_derivative(g: &ScalarField, axis: usize, second: bool) -> Vec<f64> {
    let spec = g.spec();
    let n = spec.dims()[axis];
    let stride = spec.strides()[axis];
    let h = spec.spacing()[axis];
    let v = g.values();
    (0..v.len())
        .into_par_iter()
        .map(|flat| {
            let i = (flat / stride) % n;
            let at = |d: isize| v[(flat as isize + d * stride as isize) as usize];
            if second {
                if i >= 2 && i + 2 < n {
                    (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * h * h)
                } else if i == 0 {
                    (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / (h * h)
                } else if i == n - 1 {
                    (2.0 * at(0) - 5.0 * at(-1) + 4.0 * at(-2) - at(-3)) / (h * h)
                } else {
                    (at(-1) - 2.0 * at(0) + at(1)) / (h * h)
                }
            } else if i >= 2 && i + 2 < n {
                (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h)
            } else if i == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * at(0) - 4.0 * at(-1) + at(-2)) / (2.0 * h)
            } else {
                (at(1) - at(-1)) / (2.0 * h)
            }
        })
        .collect()
}

/// `L g` by finite differences.
pub fn l_apply_fd(g: &ScalarField, params: &TransformParams) -> Result<ScalarField> {
    params.check_grid(g.spec())?;
    let spec = g.spec();
    for (axis, &len) in spec.dims().iter().enumerate() {
        if len < FD_MIN {
            return Err(Error::Stencil {
                axis,
                len,
                need: FD_MIN,
            });
        }
    }
    let a = params.a();
    let t2 = params.t() * params.t();
    let za = spec.z_axis();
    let dz = fd_derivative(g, za, false);
    let dzz = fd_derivative(g, za, true);
    let mut out: Vec<f64> = g
        .values()
        .par_iter()
        .zip(&dz)
        .zip(&dzz)
        .map(|((&v, &d1), &d2)| a * a * v - 2.0 * a * d1 + d2)
        .collect();
    for axis in 0..za {
        let dxx = fd_derivative(g, axis, true);
        out.par_iter_mut().zip(&dxx).for_each(|(o, d)| *o -= t2 * d);
    }
    Ok(ScalarField::from_parts_unchecked(spec.clone(), out))
}

/// Per-column trapezoid integrals of `e^{-a (z - z_0)} h` and of its modulus.
/// The common shift `z_0` (grid bottom) cancels in the ratio.
fn column_moments(h: &ScalarField, a: f64) -> Vec<(f64, f64)> {
    let spec = h.spec();
    let za = spec.z_axis();
    let nz = spec.dims()[za];
    let dz = spec.spacing()[za];
    let weights: Vec<f64> = (0..nz)
        .map(|j| {
            let end = if j == 0 || j == nz - 1 { 0.5 } else { 1.0 };
            end * dz * (-a * j as f64 * dz).exp()
        })
        .collect();
    h.values()
        .par_chunks(nz)
        .map(|col| {
            col.iter()
                .zip(&weights)
                .fold((0.0, 0.0), |(m, d), (v, w)| (m + w * v, d + w * v.abs()))
        })
        .collect()
}

/// `max_x |int e^{-az} h dz| / max_x int e^{-az} |h| dz`; `0` for `h = 0`.
pub fn moment_residual(h: &ScalarField, params: &TransformParams) -> Result<f64> {
    params.check_grid(h.spec())?;
    let cols = column_moments(h, params.a());
    let num = cols.iter().fold(0.0_f64, |m, c| m.max(c.0.abs()));
    let den = cols.iter().fold(0.0_f64, |m, c| m.max(c.1));
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

/// Thresholds and the declared support region for a range test.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeTolerances {
    pub eps_support: f64,
    pub moment_tol: f64,
    /// Box that must contain the `eps`-support of `h`.
    pub region: (Vec<f64>, Vec<f64>),
    /// Sub-box of the grid on which `h` is observed. When `g` lives on a
    /// padded working grid this is the original domain; `None` uses the
    /// whole grid.
    pub window: Option<(Vec<f64>, Vec<f64>)>,
}

impl RangeTolerances {
    pub fn new(region_lo: Vec<f64>, region_hi: Vec<f64>) -> Result<Self> {
        let t = RangeTolerances {
            eps_support: DEFAULT_EPS_SUPPORT,
            moment_tol: DEFAULT_MOMENT_TOL,
            region: (region_lo, region_hi),
            window: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_window(mut self, lo: Vec<f64>, hi: Vec<f64>) -> Self {
        self.window = Some((lo, hi));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_support > 0.0 && self.eps_support < 1.0) {
            return Err(Error::Invalid(format!(
                "eps_support must lie in (0, 1), got {}",
                self.eps_support
            )));
        }
        if !(self.moment_tol > 0.0) {
            return Err(Error::Invalid(format!(
                "moment_tol must be positive, got {}",
                self.moment_tol
            )));
        }
        let (lo, hi) = &self.region;
        if lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
            return Err(Error::Invalid(
                "support region must be a non-empty box".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeReport {
    pub theorem: Theorem,
    pub support_ok: bool,
    /// `None` when `h` vanishes identically.
    pub support_box: Option<SupportBox>,
    /// Per axis, the smaller distance from the support box to the region
    /// faces; negative when the support leaks out. Infinite for empty support.
    pub margin: Vec<f64>,
    pub moment_residual: f64,
    pub passed: bool,
    pub eps_support: f64,
    pub moment_tol: f64,
}

impl RangeReport {
    /// `key,value` lines with a header row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        s += &format!("theorem,{}\n", self.theorem);
        s += &format!("passed,{}\n", self.passed);
        s += &format!("support_ok,{}\n", self.support_ok);
        for (a, m) in self.margin.iter().enumerate() {
            s += &format!("margin_{a},{m:e}\n");
        }
        if let Some(b) = &self.support_box {
            for a in 0..b.lo.len() {
                s += &format!(
                    "support_lo_{a},{:e}\nsupport_hi_{a},{:e}\n",
                    b.lo[a], b.hi[a]
                );
            }
        }
        s += &format!("moment_residual,{:e}\n", self.moment_residual);
        s += &format!("eps_support,{:e}\n", self.eps_support);
        s += &format!("moment_tol,{:e}\n", self.moment_tol);
        s
    }
}

/// Support and moment tests on an already computed `h`.
pub fn assess(
    h: &ScalarField,
    params: &TransformParams,
    theorem: Theorem,
    tol: &RangeTolerances,
) -> Result<RangeReport> {
    tol.validate()?;
    let (rlo, rhi) = &tol.region;
    if rlo.len() != h.spec().ndim() {
        return Err(Error::Invalid(
            "support region has the wrong number of axes".into(),
        ));
    }
    let observed;
    let h = match &tol.window {
        Some((lo, hi)) => {
            observed = crop(h, &window_spec(h.spec(), lo, hi)?)?;
            &observed
        }
        None => h,
    };
    let support = support_box(h, tol.eps_support)?;
    let margin: Vec<f64> = match &support {
        Some(b) => (0..rlo.len())
            .map(|a| (b.lo[a] - rlo[a]).min(rhi[a] - b.hi[a]))
            .collect(),
        None => vec![f64::INFINITY; rlo.len()],
    };
    let support_ok = margin.iter().all(|&m| m >= 0.0);
    let moment = if theorem.has_moment_condition() {
        moment_residual(h, params)?
    } else {
        0.0
    };
    let passed = support_ok && (!theorem.has_moment_condition() || moment <= tol.moment_tol);
    Ok(RangeReport {
        theorem,
        support_ok,
        support_box: support,
        margin,
        moment_residual: moment,
        passed,
        eps_support: tol.eps_support,
        moment_tol: tol.moment_tol,
    })
}

pub fn check_range(
    g: &ScalarField,
    params: &TransformParams,
    theorem: Theorem,
    tol: &RangeTolerances,
    padding: &PadSpec,
) -> Result<RangeReport> {
    let h = range_operator(g, params, theorem, padding, tol.eps_support)?;
    assess(&h, params, theorem, tol)
}

pub fn check_range_c_odd(
    g: &ScalarField,
    params: &TransformParams,
    tol: &RangeTolerances,
    padding: &PadSpec,
) -> Result<RangeReport> {
    check_range(g, params, Theorem::COdd, tol, padding)
}

pub fn check_range_c_even(
    g: &ScalarField,
    params: &TransformParams,
    tol: &RangeTolerances,
    padding: &PadSpec,
) -> Result<RangeReport> {
    check_range(g, params, Theorem::CEven, tol, padding)
}

pub fn check_range_a_odd(
    g: &ScalarField,
    params: &TransformParams,
    tol: &RangeTolerances,
    padding: &PadSpec,
) -> Result<RangeReport> {
    check_range(g, params, Theorem::AOdd, tol, padding)
}

pub fn check_range_a_even(
    g: &ScalarField,
    params: &TransformParams,
    tol: &RangeTolerances,
    padding: &PadSpec,
) -> Result<RangeReport> {
    check_range(g, params, Theorem::AEven, tol, padding)
}

/// Region of a grid's own extent, handy for "anything goes" checks.
pub fn full_region(spec: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    (
        spec.origin().to_vec(),
        (0..spec.ndim()).map(|a| spec.upper(a)).collect(),
    )
}
