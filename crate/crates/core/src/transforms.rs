//! Forward cone transform `C` and auxiliary transform `A`.
//!
//! Both are available as direct quadrature over the analytic phantom and as
//! Fourier multipliers on a padded periodic grid. With `a = mu / cos(psi)`,
//! `t = tan(psi)` and `P(xi, sigma) = (a - i sigma)^2 + |xi|^2 t^2`:
//!
//! ```text
//! C:  alpha_n (a - i sigma) P^{-(n+1)/2}
//! A:  beta_n P^{-(n-1)/2}
//! ```

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{self, crop, dft_forward, pad, GridSpec, PadSpec, ScalarField};
use crate::phantoms::PhantomSpec;
use crate::quadrature::{composite_gauss_legendre, SphereRule};
use crate::special::{alpha_n, beta_n};

/// Relative level below which periodic wraparound along `-z` is ignored.
pub const WRAP_EPS: f64 = 1e-10;

/// Largest spatial dimension accepted. Multipliers work for any `n`; direct
/// quadrature needs a sphere rule and is limited to `n <= 3`.
pub const MAX_DIM: usize = 5;

const GL_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    pub mu: f64,
    pub psi: f64,
    pub n: usize,
}

impl TransformParams {
    pub fn new(mu: f64, psi: f64, n: usize) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!(
                "attenuation must be positive, got {mu}"
            )));
        }
        if !(psi > 0.0 && psi < FRAC_PI_2) {
            return Err(Error::Domain(format!(
                "opening angle must lie in (0, pi/2), got {psi}"
            )));
        }
        if n == 0 || n > MAX_DIM {
            return Err(Error::Domain(format!(
                "dimension must be in 1..={MAX_DIM}, got {n}"
            )));
        }
        Ok(TransformParams { mu, psi, n })
    }

    /// Attenuation per unit height, `mu / cos(psi)`.
    pub fn a(&self) -> f64 {
        self.mu / self.psi.cos()
    }

    pub fn t(&self) -> f64 {
        self.psi.tan()
    }

    /// `(n + 1) / 2` for odd `n`, `n / 2` for even `n`.
    pub fn k(&self) -> usize {
        if self.n % 2 == 1 {
            self.n.div_ceil(2)
        } else {
            self.n / 2
        }
    }

    pub fn alpha(&self) -> f64 {
        alpha_n(self.n, self.psi).expect("validated parameters")
    }

    pub fn beta(&self) -> Result<f64> {
        beta_n(self.n, self.psi)
    }

    /// Symbol of `L` at squared lateral frequency `xi_sq` and vertical
    /// frequency `sigma`.
    pub fn l_symbol(&self, xi_sq: f64, sigma: f64) -> Complex64 {
        let a = self.a();
        let t = self.t();
        let s = Complex64::new(a, -sigma);
        s * s + xi_sq * t * t
    }

    /// [`Self::l_symbol`] at a full frequency vector `(xi_1, .., xi_n, sigma)`.
    pub fn l_symbol_at(&self, w: &[f64]) -> Complex64 {
        let (xi, sigma) = w.split_at(w.len() - 1);
        self.l_symbol(xi.iter().map(|x| x * x).sum(), sigma[0])
    }

    pub(crate) fn check_grid(&self, spec: &GridSpec) -> Result<()> {
        if spec.ndim() != self.n + 1 {
            return Err(Error::Invalid(format!(
                "dimension {} needs a grid with {} axes, got {}",
                self.n,
                self.n + 1,
                spec.ndim()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_aux(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain("the auxiliary transform needs n >= 2".into()));
        }
        Ok(())
    }
}

/// `w^{m/2}` on the principal branch.
pub(crate) fn half_power(w: Complex64, m: i32) -> Complex64 {
    let whole = w.powi(m.div_euclid(2));
    if m.rem_euclid(2) == 1 {
        whole * w.sqrt()
    } else {
        whole
    }
}

fn multiplier_c_raw(p: &TransformParams, alpha: f64, base: Complex64, sigma: f64) -> Complex64 {
    alpha * Complex64::new(p.a(), -sigma) * half_power(base, -(p.n as i32 + 1))
}

fn multiplier_a_raw(p: &TransformParams, beta: f64, base: Complex64) -> Complex64 {
    beta * half_power(base, -(p.n as i32 - 1))
}

/// Fourier multiplier of `C` at lateral frequency magnitude `xi_norm`.
pub fn multiplier_c(params: &TransformParams, xi_norm: f64, sigma: f64) -> Complex64 {
    multiplier_c_raw(
        params,
        params.alpha(),
        params.l_symbol(xi_norm * xi_norm, sigma),
        sigma,
    )
}

/// Fourier multiplier of `A`; undefined for `n = 1`.
pub fn multiplier_a(params: &TransformParams, xi_norm: f64, sigma: f64) -> Result<Complex64> {
    params.require_aux()?;
    Ok(multiplier_a_raw(
        params,
        params.beta()?,
        params.l_symbol(xi_norm * xi_norm, sigma),
    ))
}

/// Symbol of `C` as a function of the full frequency vector.
pub(crate) fn cone_symbol(params: &TransformParams) -> impl Fn(&[f64]) -> Complex64 + Sync + '_ {
    let alpha = params.alpha();
    move |w| multiplier_c_raw(params, alpha, params.l_symbol_at(w), w[w.len() - 1])
}

pub(crate) fn aux_symbol(
    params: &TransformParams,
) -> Result<impl Fn(&[f64]) -> Complex64 + Sync + '_> {
    params.require_aux()?;
    let beta = params.beta()?;
    Ok(move |w: &[f64]| multiplier_a_raw(params, beta, params.l_symbol_at(w)))
}

/// Padding with the given total factor on every axis plus room below the
/// grid for the `e^{-a z}` tail to fall under [`WRAP_EPS`].
pub fn transform_padding(params: &TransformParams, factor: f64) -> Result<PadSpec> {
    PadSpec::uniform(params.n + 1, factor)?.with_z_margin(-WRAP_EPS.ln() / params.a())
}

/// Pad, multiply by `symbol`, transform back. The result lives on the padded
/// grid.
pub(crate) fn apply_on_padded<S>(
    f: &ScalarField,
    padding: &PadSpec,
    symbol: S,
) -> Result<ScalarField>
where
    S: Fn(&[f64]) -> Complex64 + Sync,
{
    let padded;
    let source = if padding.is_identity() {
        f
    } else {
        padded = pad(f, padding, 0.0)?;
        &padded
    };
    let mut spectrum = dft_forward(source);
    spectrum.apply_symbol(symbol);
    fields::dft_inverse_owned(spectrum)
}

/// `C f` through the multiplier, cropped back to `f`'s grid.
pub fn cone_forward_spectral(
    f: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ScalarField> {
    crop(&cone_forward_spectral_padded(f, params, padding)?, f.spec())
}

/// `C f` on the padded working grid. Operators applied afterwards with
/// [`PadSpec::none`] act on this grid as exact multiplier algebra.
pub fn cone_forward_spectral_padded(
    f: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ScalarField> {
    params.check_grid(f.spec())?;
    apply_on_padded(f, padding, cone_symbol(params))
}

pub fn aux_forward_spectral(
    f: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ScalarField> {
    crop(&aux_forward_spectral_padded(f, params, padding)?, f.spec())
}

pub fn aux_forward_spectral_padded(
    f: &ScalarField,
    params: &TransformParams,
    padding: &PadSpec,
) -> Result<ScalarField> {
    params.check_grid(f.spec())?;
    apply_on_padded(f, padding, aux_symbol(params)?)
}

/// Nodes for direct evaluation of the cone integrals.
#[derive(Debug, Clone)]
pub struct ConeQuadratureSpec {
    pub z_nodes: Vec<f64>,
    pub z_weights: Vec<f64>,
    pub z_max: f64,
    pub sphere: SphereRule,
}

impl ConeQuadratureSpec {
    /// Composite 16-point Gauss–Legendre on `[0, z_max]` with panels no wider
    /// than `min(4 dz, 1 / a)`, and the default sphere rule for `n`.
    pub fn new(params: &TransformParams, z_max: f64, dz: f64) -> Result<Self> {
        if !(z_max > 0.0) || !z_max.is_finite() || !(dz > 0.0) {
            return Err(Error::Invalid(format!(
                "bad quadrature extent z_max={z_max}, dz={dz}"
            )));
        }
        let sphere = SphereRule::default_for(params.n)
            .ok_or_else(|| Error::Domain(format!("no sphere rule for n = {}", params.n)))?;
        let width = (4.0 * dz).min(1.0 / params.a());
        let panels = (z_max / width).ceil().max(1.0) as usize;
        let (z_nodes, z_weights) = composite_gauss_legendre(0.0, z_max, panels, GL_ORDER);
        Ok(ConeQuadratureSpec {
            z_nodes,
            z_weights,
            z_max,
            sphere,
        })
    }

    /// Smallest `z_max` that reaches the whole phantom from every apex on
    /// `out_spec`.
    pub fn for_grid(
        params: &TransformParams,
        phantom: &PhantomSpec,
        out_spec: &GridSpec,
    ) -> Result<Self> {
        let za = out_spec.z_axis();
        let dz = out_spec.spacing()[za];
        let reach = required_reach(phantom, out_spec).unwrap_or(0.0);
        Self::new(params, reach.max(dz), dz)
    }

    pub fn with_sphere(mut self, sphere: SphereRule) -> Self {
        self.sphere = sphere;
        self
    }
}

fn required_reach(phantom: &PhantomSpec, out_spec: &GridSpec) -> Option<f64> {
    let (_, hi) = phantom.bounding_box()?;
    let za = out_spec.z_axis();
    Some(hi[za] - out_spec.origin()[za])
}

/// Direct quadrature of `C f`.
pub fn cone_forward_direct(
    phantom: &PhantomSpec,
    params: &TransformParams,
    out_spec: &GridSpec,
    quad: &ConeQuadratureSpec,
) -> Result<ScalarField> {
    let mut out = direct(phantom, params, out_spec, quad, &[params.n as i32 - 1])?;
    Ok(out.remove(0))
}

/// Direct quadrature of `A f`; `n >= 2`.
pub fn aux_forward_direct(
    phantom: &PhantomSpec,
    params: &TransformParams,
    out_spec: &GridSpec,
    quad: &ConeQuadratureSpec,
) -> Result<ScalarField> {
    params.require_aux()?;
    let mut out = direct(phantom, params, out_spec, quad, &[params.n as i32 - 2])?;
    Ok(out.remove(0))
}

/// `(C f, A f)` from one sweep over the shared ray geometry.
pub fn forward_direct_pair(
    phantom: &PhantomSpec,
    params: &TransformParams,
    out_spec: &GridSpec,
    quad: &ConeQuadratureSpec,
) -> Result<(ScalarField, ScalarField)> {
    params.require_aux()?;
    let mut out = direct(
        phantom,
        params,
        out_spec,
        quad,
        &[params.n as i32 - 1, params.n as i32 - 2],
    )?;
    let a = out.pop().expect("two outputs");
    let c = out.pop().expect("two outputs");
    Ok((c, a))
}

/// Shared kernel: for every apex, direction and bump the ray `apex + z (t w, 1)`
/// meets the bump's ball in a `z` interval found in closed form; only
/// quadrature nodes inside it are evaluated since the bump vanishes elsewhere.
fn direct(
    phantom: &PhantomSpec,
    params: &TransformParams,
    out_spec: &GridSpec,
    quad: &ConeQuadratureSpec,
    z_powers: &[i32],
) -> Result<Vec<ScalarField>> {
    params.check_grid(out_spec)?;
    if let Some(d) = phantom.ndim() {
        if d != out_spec.ndim() {
            return Err(Error::Invalid(format!(
                "phantom has {d} coordinates, grid has {}",
                out_spec.ndim()
            )));
        }
    }
    if quad.sphere.dim != params.n {
        return Err(Error::Invalid(format!(
            "sphere rule is for n = {}, need {}",
            quad.sphere.dim, params.n
        )));
    }
    if let Some(reach) = required_reach(phantom, out_spec) {
        if quad.z_max < reach * (1.0 - 1e-12) {
            return Err(Error::Geometry(format!(
                "z_max = {} but the phantom reaches {reach} above the lowest apex",
                quad.z_max
            )));
        }
    }
    let n = params.n;
    let a = params.a();
    let t = params.t();
    let e2 = 1.0 + t * t;
    let prefactor = t.powi(n as i32 - 1) / params.psi.cos();
    let tables: Vec<Vec<f64>> = z_powers
        .iter()
        .map(|&p| {
            quad.z_nodes
                .iter()
                .zip(&quad.z_weights)
                .map(|(&z, &w)| w * (-a * z).exp() * z.powi(p))
                .collect()
        })
        .collect();
    let nodes = &quad.z_nodes;
    let za = out_spec.z_axis();
    let nz = out_spec.dims()[za];
    let lines = out_spec.len() / nz;
    let m = z_powers.len();

    let results: Vec<Vec<f64>> = (0..lines)
        .into_par_iter()
        .map(|line| {
            let mut idx = vec![0; n + 1];
            out_spec.unravel(line * nz, &mut idx);
            let u: Vec<f64> = (0..n).map(|i| out_spec.coord(i, idx[i])).collect();
            let mut out = vec![0.0; m * nz];
            let mut per_dir = vec![0.0; m];
            let mut acc = vec![0.0; m];
            for k in 0..nz {
                let v = out_spec.coord(za, k);
                acc.iter_mut().for_each(|x| *x = 0.0);
                for (i, &w_dir) in quad.sphere.weights.iter().enumerate() {
                    let omega = quad.sphere.direction(i);
                    per_dir.iter_mut().for_each(|x| *x = 0.0);
                    for bump in &phantom.terms {
                        let c = &bump.center;
                        let r2 = bump.radius * bump.radius;
                        let dz = v - c[n];
                        let mut dd = dz * dz;
                        let mut de = dz;
                        for j in 0..n {
                            let dx = u[j] - c[j];
                            dd += dx * dx;
                            de += t * dx * omega[j];
                        }
                        let disc = de * de - e2 * (dd - r2);
                        if disc <= 0.0 {
                            continue;
                        }
                        let sq = disc.sqrt();
                        let z_hi = ((-de + sq) / e2).min(quad.z_max);
                        if z_hi <= 0.0 {
                            continue;
                        }
                        let z_lo = ((-de - sq) / e2).max(0.0);
                        let start = nodes.partition_point(|&z| z < z_lo);
                        let stop = nodes.partition_point(|&z| z <= z_hi);
                        for jz in start..stop {
                            let z = nodes[jz];
                            let s = (dd + z * (2.0 * de + z * e2)) / r2;
                            if s >= 1.0 {
                                continue;
                            }
                            let val = bump.amplitude * (1.0 - 1.0 / (1.0 - s)).exp();
                            for (q, tab) in tables.iter().enumerate() {
                                per_dir[q] += tab[jz] * val;
                            }
                        }
                    }
                    for q in 0..m {
                        acc[q] += w_dir * per_dir[q];
                    }
                }
                for q in 0..m {
                    out[q * nz + k] = prefactor * acc[q];
                }
            }
            out
        })
        .collect();

    Ok((0..m)
        .map(|q| {
            let mut values = Vec::with_capacity(out_spec.len());
            for line in &results {
                values.extend_from_slice(&line[q * nz..(q + 1) * nz]);
            }
            ScalarField::from_parts_unchecked(out_spec.clone(), values)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{norms, PadSpec};
    use crate::special::{laplace_hankel_b, BesselOrder};
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn params(n: usize) -> TransformParams {
        TransformParams::new(1.0, FRAC_PI_4, n).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(TransformParams::new(0.0, 0.5, 1).is_err());
        assert!(TransformParams::new(1.0, 0.0, 1).is_err());
        assert!(TransformParams::new(1.0, FRAC_PI_2, 1).is_err());
        assert!(TransformParams::new(1.0, 0.5, 0).is_err());
        let p = params(3);
        assert!((p.a() - SQRT_2).abs() < 1e-15);
        assert_eq!(
            (params(1).k(), params(2).k(), params(3).k(), params(4).k()),
            (1, 1, 2, 2)
        );
    }

    #[test]
    fn multiplier_values() {
        let p = params(1);
        let a = p.a();
        // xi = 0, sigma = 0 collapses to alpha a^{-n}
        for n in 1..=5 {
            let q = params(n);
            let m = multiplier_c(&q, 0.0, 0.0);
            assert!((m.re - q.alpha() * a.powi(-(n as i32))).abs() < 1e-13 * m.re && m.im == 0.0);
            if n >= 2 {
                let m = multiplier_a(&q, 0.0, 0.0).unwrap();
                assert!((m.re - q.beta().unwrap() * a.powi(1 - n as i32)).abs() < 1e-13 * m.re);
            }
        }
        // n = 1 reduces to alpha / (a - i sigma)
        let m = multiplier_c(&p, 0.0, a);
        let expect = p.alpha() / Complex64::new(a, -a);
        assert!((m - expect).norm() < 1e-14);
        assert!((m - Complex64::new(1.0, 1.0)).norm() < 1e-14);
        assert!(multiplier_a(&p, 0.0, 0.0).is_err());
    }

    #[test]
    fn multipliers_conjugate_symmetric_and_continuous() {
        for n in 1..=5 {
            let p = params(n);
            let mut prev: Option<Complex64> = None;
            for i in 0..=4000 {
                let sigma = -20.0 + 0.01 * i as f64;
                let m = multiplier_c(&p, 1.7, sigma);
                assert!((multiplier_c(&p, 1.7, -sigma) - m.conj()).norm() <= 1e-15 * m.norm());
                if let Some(q) = prev {
                    // the principal branch never jumps across sigma = 0
                    assert!((m / q - 1.0).norm() < 0.05, "n={n} sigma={sigma}");
                }
                prev = Some(m);
                assert!(p.l_symbol(1.7 * 1.7, sigma).norm() >= p.a() * p.a() * 1e-12);
            }
        }
    }

    #[test]
    fn aux_multiplier_matches_laplace_hankel_closed_form() {
        // For n = 3, int_0^inf e^{-(a - i sigma) z} j0(|xi| t z) ... reduces to
        // beta_3 / P via the second Laplace–Hankel identity with nu = 1/2.
        let p = params(3);
        let mut s = 12345u64;
        let mut rnd = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let xi = 3.0 * rnd();
            let sigma = 6.0 * rnd() - 3.0;
            let m = multiplier_a(&p, xi, sigma).unwrap();
            let expect = p.beta().unwrap() / p.l_symbol(xi * xi, sigma);
            assert!((m - expect).norm() <= 1e-14 * expect.norm());
        }
        // real-a check of the same closed form through the special module
        let y = 1.3 * p.t();
        let chk = laplace_hankel_b(BesselOrder::Half.value(), p.a(), y).unwrap();
        let closed = PI.powf(-0.5) * 2f64.sqrt() * y / (p.a() * p.a() + y * y);
        assert!((chk.rhs.re - closed).abs() < 1e-14);
    }

    #[test]
    fn half_power_principal_branch() {
        let w = Complex64::new(-3.0, 1e-3);
        assert!((half_power(w, 1) - w.sqrt()).norm() < 1e-15);
        assert!((half_power(w, -3) - w.powf(-1.5)).norm() < 1e-12);
        assert!((half_power(w, 4) - w * w).norm() < 1e-12);
    }

    fn box1(n: usize) -> GridSpec {
        GridSpec::from_extent(&[n, n], &[-2.0, -2.0], &[2.0, 2.0]).unwrap()
    }

    #[test]
    fn zero_and_geometry() {
        let p = params(1);
        let g = box1(16);
        let empty = PhantomSpec::default();
        let q = ConeQuadratureSpec::for_grid(&p, &empty, &g).unwrap();
        assert!(cone_forward_direct(&empty, &p, &g, &q)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let ph = PhantomSpec::single(vec![0.0, -1.0], 0.5, 1.0).unwrap();
        let q = ConeQuadratureSpec::for_grid(&p, &ph, &g).unwrap();
        let out = cone_forward_direct(&ph, &p, &g, &q).unwrap();
        // apices above the top of the support see nothing
        for (flat, v) in out.values().iter().enumerate() {
            let mut idx = [0; 2];
            g.unravel(flat, &mut idx);
            if g.coord(1, idx[1]) > -0.5 {
                assert_eq!(*v, 0.0);
            }
        }
        assert!(out.max_abs() > 0.0);
        let short = ConeQuadratureSpec::new(&p, 0.5, 0.1).unwrap();
        assert!(matches!(
            cone_forward_direct(&ph, &p, &g, &short),
            Err(Error::Geometry(_))
        ));
        assert!(aux_forward_direct(&ph, &p, &g, &q).is_err());
    }

    #[test]
    fn direct_point_value_against_adaptive_oracle() {
        // n = 1: g(u, v) = (1/cos psi) sum_{w = +-1} int f(u + w t z, v + z) e^{-a z} dz
        let p = TransformParams::new(0.7, 0.6, 1).unwrap();
        let ph = PhantomSpec::single(vec![0.2, 0.3], 0.5, 1.0).unwrap();
        let g = GridSpec::new(vec![2, 2], vec![0.0, -0.5], vec![0.15, 0.1]).unwrap();
        // panels of width 4 * 0.02 resolve the bump edges well
        let q = ConeQuadratureSpec::new(&p, 3.0, 0.02).unwrap();
        let out = cone_forward_direct(&ph, &p, &g, &q).unwrap();
        for (flat, got) in out.values().iter().enumerate() {
            let mut idx = [0; 2];
            g.unravel(flat, &mut idx);
            let (u, v) = (g.coord(0, idx[0]), g.coord(1, idx[1]));
            let mut expect = 0.0;
            for w in [-1.0, 1.0] {
                let f = |z: f64| ph.eval(&[u + w * p.t() * z, v + z]) * (-p.a() * z).exp();
                expect += crate::quadrature::adaptive_gk15(f, 0.0, 3.0, 1e-14, 2000).value;
            }
            expect /= p.psi.cos();
            assert!(
                (got - expect).abs() < 1e-9 * expect.abs().max(1e-3),
                "{got} vs {expect}"
            );
        }
    }

    #[test]
    fn spectral_linear_and_zero() {
        let p = params(1);
        let g = box1(32);
        let pad = transform_padding(&p, 2.0).unwrap();
        let f1 = PhantomSpec::single(vec![0.1, 0.0], 0.6, 1.0)
            .unwrap()
            .sample(&g)
            .unwrap();
        let f2 = PhantomSpec::single(vec![-0.3, 0.2], 0.4, -0.5)
            .unwrap()
            .sample(&g)
            .unwrap();
        let zero = cone_forward_spectral(&ScalarField::zeros(g.clone()), &p, &pad).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let lhs = cone_forward_spectral(&f1.add(&f2).unwrap(), &p, &pad).unwrap();
        let rhs = cone_forward_spectral(&f1, &p, &pad)
            .unwrap()
            .add(&cone_forward_spectral(&f2, &p, &pad).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-12 * lhs.max_abs());
        assert!(aux_forward_spectral(&f1, &p, &pad).is_err());
    }

    #[test]
    fn spectral_translation_covariant_on_torus() {
        let p = params(2);
        let g = GridSpec::from_extent(&[16, 16, 16], &[-2.0; 3], &[2.0; 3]).unwrap();
        let h = g.spacing()[0];
        let f = PhantomSpec::single(vec![0.0, 0.1, 0.0], 0.9, 1.0)
            .unwrap()
            .sample(&g)
            .unwrap();
        let shifted = PhantomSpec::single(vec![h, 0.1, 0.0], 0.9, 1.0)
            .unwrap()
            .sample(&g)
            .unwrap();
        let none = PadSpec::none(3);
        let a = aux_forward_spectral(&f, &p, &none).unwrap();
        let b = aux_forward_spectral(&shifted, &p, &none).unwrap();
        let mut worst: f64 = 0.0;
        for (flat, v) in b.values().iter().enumerate() {
            let mut idx = [0; 3];
            g.unravel(flat, &mut idx);
            idx[0] = (idx[0] + 15) % 16;
            worst = worst.max((v - a.at(&idx)).abs());
        }
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn direct_matches_spectral_n1_coarse() {
        let p = params(1);
        let g = box1(64);
        let ph = PhantomSpec::single(vec![0.0, 0.0], 0.5, 1.0).unwrap();
        let q = ConeQuadratureSpec::for_grid(&p, &ph, &g).unwrap();
        let d = cone_forward_direct(&ph, &p, &g, &q).unwrap();
        let s = cone_forward_spectral(
            &ph.sample(&g).unwrap(),
            &p,
            &transform_padding(&p, 2.0).unwrap(),
        )
        .unwrap();
        let rel = norms(&d.sub(&s).unwrap()).l2 / norms(&d).l2;
        assert!(rel < 5e-2, "{rel}");
    }
}
