//! Special functions and the integral identities behind the transform
//! multipliers, with quadrature-based checks of each identity.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_gk15, SphereRule};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for positive real arguments.
///
/// Integers and half-integers up to 170 are evaluated exactly through their
/// factorial forms; everything else uses a Lanczos approximation.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    if x <= 171.0 {
        if x.fract() == 0.0 {
            return Ok((1..x as u64).fold(1.0, |acc, k| acc * k as f64));
        }
        if (x - 0.5).fract() == 0.0 {
            // Gamma(m + 1/2) = sqrt(pi) * prod_{j=1}^{m} (j - 1/2)
            let m = (x - 0.5) as u64;
            return Ok((1..=m).fold(PI.sqrt(), |acc, j| acc * (j as f64 - 0.5)));
        }
    }
    Ok(lanczos_gamma(x))
}

fn lanczos_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Bessel orders supported by [`bessel_j`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    MinusHalf,
    Zero,
    Half,
    One,
}

impl BesselOrder {
    pub fn from_f64(nu: f64) -> Result<Self> {
        match nu {
            -0.5 => Ok(BesselOrder::MinusHalf),
            0.0 => Ok(BesselOrder::Zero),
            0.5 => Ok(BesselOrder::Half),
            1.0 => Ok(BesselOrder::One),
            _ => Err(Error::Domain(format!(
                "Bessel order {nu} not supported (use -1/2, 0, 1/2, 1)"
            ))),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            BesselOrder::MinusHalf => -0.5,
            BesselOrder::Zero => 0.0,
            BesselOrder::Half => 0.5,
            BesselOrder::One => 1.0,
        }
    }

    /// The order `(n - 2) / 2` appearing in the sphere identity for `S^{n-1}`.
    pub fn for_sphere_dim(n: usize) -> Result<Self> {
        Self::from_f64((n as f64 - 2.0) / 2.0)
    }
}

/// Bessel function of the first kind `J_nu(x)` for `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    let order = BesselOrder::from_f64(nu)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel_j requires finite x >= 0, got {x}"
        )));
    }
    match order {
        BesselOrder::MinusHalf if x == 0.0 => {
            Err(Error::Singularity("J_{-1/2}(x) diverges at x = 0".into()))
        }
        BesselOrder::MinusHalf => Ok((2.0 / (PI * x)).sqrt() * x.cos()),
        BesselOrder::Half if x == 0.0 => Ok(0.0),
        BesselOrder::Half => Ok((2.0 / (PI * x)).sqrt() * x.sin()),
        BesselOrder::Zero => Ok(j0_j1(x).0),
        BesselOrder::One => Ok(j0_j1(x).1),
    }
}

/// `J_nu(s) * sqrt(s)`, finite at `s = 0` for every supported order.
fn bessel_j_sqrt(order: BesselOrder, s: f64) -> f64 {
    match order {
        BesselOrder::MinusHalf => (2.0 / PI).sqrt() * s.cos(),
        BesselOrder::Half => (2.0 / PI).sqrt() * s.sin(),
        BesselOrder::Zero => j0_j1(s).0 * s.sqrt(),
        BesselOrder::One => j0_j1(s).1 * s.sqrt(),
    }
}

/// `(J_0(x), J_1(x))`: power series below 8, Miller's backward recurrence
/// normalized by `J_0 + 2 sum J_2k = 1` above.
fn j0_j1(x: f64) -> (f64, f64) {
    if x < 8.0 {
        let q = -0.25 * x * x;
        let (mut t0, mut t1) = (1.0, 0.5 * x);
        let (mut s0, mut s1) = (t0, t1);
        for k in 1..60 {
            let k = k as f64;
            t0 *= q / (k * k);
            t1 *= q / (k * (k + 1.0));
            s0 += t0;
            s1 += t1;
            if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
                break;
            }
        }
        return (s0, s1);
    }
    let start = (x + 50.0 + 10.0 * x.cbrt()).ceil() as usize;
    let start = start + start % 2;
    let (mut next, mut cur) = (0.0_f64, 1e-30_f64);
    let mut norm = 0.0;
    let (mut j0, mut j1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        // cur = J_k (unnormalized), next = J_{k+1}
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 != 0 && (k - 1) % 2 == 0 {
            norm += 2.0 * cur;
        }
        if k == 1 {
            j1 = next;
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

fn check_angle(psi: f64) -> Result<()> {
    if psi > 0.0 && psi < PI / 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "opening angle must lie in (0, pi/2), got {psi}"
        )))
    }
}

/// Numerator constant of the cone-transform multiplier in dimension `n`.
pub fn alpha_n(n: usize, psi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    check_angle(psi)?;
    let nf = n as f64;
    Ok(2f64.powi(n as i32)
        * PI.powf((nf - 1.0) / 2.0)
        * gamma((nf + 1.0) / 2.0)?
        * psi.tan().powi(n as i32 - 1)
        / psi.cos())
}

/// Numerator constant of the auxiliary-transform multiplier; undefined for
/// `n = 1` where `Gamma(0)` appears.
pub fn beta_n(n: usize, psi: f64) -> Result<f64> {
    if n <= 1 {
        return Err(Error::Domain(format!(
            "beta_n needs n >= 2 (Gamma(0) pole at n = 1), got n = {n}"
        )));
    }
    check_angle(psi)?;
    let nf = n as f64;
    Ok(2f64.powi(n as i32 - 1)
        * PI.powf((nf - 1.0) / 2.0)
        * gamma((nf - 1.0) / 2.0)?
        * psi.tan().powi(n as i32 - 1)
        / psi.cos())
}

/// Quadrature value against closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_error: f64,
}

impl IdentityCheck {
    const FLOOR: f64 = 1e-300;

    pub fn new(lhs: Complex64, rhs: Complex64) -> Self {
        let rel_error = (lhs - rhs).norm() / rhs.norm().max(Self::FLOOR);
        IdentityCheck {
            lhs,
            rhs,
            rel_error,
        }
    }

    fn real(lhs: f64, rhs: f64) -> Self {
        Self::new(Complex64::new(lhs, 0.0), Complex64::new(rhs, 0.0))
    }
}

/// Plane wave integrated over `S^{n-1}` against its Bessel closed form.
pub fn funk_hecke_check(n: usize, sigma: f64) -> Result<IdentityCheck> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("sigma must be >= 0, got {sigma}")));
    }
    let (rule, theta): (SphereRule, Vec<f64>) = match n {
        2 => {
            let a: f64 = 0.7;
            (SphereRule::circle(2048), vec![a.cos(), a.sin()])
        }
        3 => {
            let v = [0.3_f64, -0.5, 0.8];
            let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            (
                SphereRule::sphere_product(32),
                v.iter().map(|c| c / r).collect(),
            )
        }
        _ => {
            return Err(Error::Domain(format!(
                "funk_hecke_check supports n in {{2, 3}}, got {n}"
            )))
        }
    };
    let lhs = rule.integrate_complex(|w| {
        let dot: f64 = w.iter().zip(&theta).map(|(a, b)| a * b).sum();
        Complex64::from_polar(1.0, -sigma * dot)
    });
    let order = BesselOrder::for_sphere_dim(n)?;
    let nf = n as f64;
    // sigma^{(2-n)/2} J_{(n-2)/2}(sigma), with the sigma -> 0 limit for n = 3
    let radial = if sigma == 0.0 {
        match order {
            BesselOrder::Zero => 1.0,
            BesselOrder::Half => (2.0 / PI).sqrt(),
            _ => unreachable!("n restricted to 2 or 3"),
        }
    } else {
        sigma.powf((2.0 - nf) / 2.0) * bessel_j(order.value(), sigma)?
    };
    let rhs = (2.0 * PI).powf(nf / 2.0) * radial;
    Ok(IdentityCheck::new(lhs, Complex64::new(rhs, 0.0)))
}

const TAIL_EPS: f64 = 1e-16;
const IDENTITY_ABS_TOL: f64 = 1e-12;
const MAX_INTERVALS: usize = 4000;

fn check_laplace_args(a: f64, y: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("a must be > 0, got {a}")));
    }
    if !(y > 0.0) {
        return Err(Error::Domain(format!("y must be > 0, got {y}")));
    }
    Ok(())
}

fn laplace_hankel_quadrature(order: BesselOrder, power: f64, a: f64, y: f64) -> f64 {
    let cutoff = -TAIL_EPS.ln() / a;
    adaptive_gk15(
        |x| x.powf(power) * (-a * x).exp() * bessel_j_sqrt(order, x * y),
        0.0,
        cutoff,
        IDENTITY_ABS_TOL,
        MAX_INTERVALS,
    )
    .value
}

/// Laplace transform of `x^{nu+1/2} J_nu(xy) (xy)^{1/2}`, valid for `nu > -1`.
pub fn laplace_hankel_a(nu: f64, a: f64, y: f64) -> Result<IdentityCheck> {
    let order = BesselOrder::from_f64(nu)?;
    if !(nu > -1.0) {
        return Err(Error::Domain(format!("nu must be > -1, got {nu}")));
    }
    check_laplace_args(a, y)?;
    let lhs = laplace_hankel_quadrature(order, nu + 0.5, a, y);
    let rhs = PI.powf(-0.5) * 2f64.powf(nu + 1.0) * gamma(nu + 1.5)? * a * y.powf(nu + 0.5)
        / (a * a + y * y).powf(nu + 1.5);
    Ok(IdentityCheck::real(lhs, rhs))
}

/// Laplace transform of `x^{nu-1/2} J_nu(xy) (xy)^{1/2}`, valid for `nu > -1/2`.
pub fn laplace_hankel_b(nu: f64, a: f64, y: f64) -> Result<IdentityCheck> {
    let order = BesselOrder::from_f64(nu)?;
    if !(nu > -0.5) {
        return Err(Error::Domain(format!("nu must be > -1/2, got {nu}")));
    }
    check_laplace_args(a, y)?;
    let lhs = laplace_hankel_quadrature(order, nu - 0.5, a, y);
    let rhs = PI.powf(-0.5) * 2f64.powf(nu) * gamma(nu + 0.5)? * y.powf(nu + 0.5)
        / (a * a + y * y).powf(nu + 0.5);
    Ok(IdentityCheck::real(lhs, rhs))
}

/// One row of the identity sweep.
#[derive(Debug, Clone)]
pub struct IdentityRow {
    pub identity: &'static str,
    pub params: String,
    pub check: IdentityCheck,
}

/// All identity checks run by `verify-identities`: the sphere identity for
/// `n` in {2, 3} and five frequencies, and both Laplace-Hankel identities
/// over every supported order on the `(a, y)` grid.
pub fn identity_sweep() -> Result<Vec<IdentityRow>> {
    let mut rows = Vec::new();
    for n in [2, 3] {
        for sigma in [0.0, 0.5, 1.0, 5.0, 10.0] {
            rows.push(IdentityRow {
                identity: "funk_hecke",
                params: format!("n={n} sigma={sigma}"),
                check: funk_hecke_check(n, sigma)?,
            });
        }
    }
    for a in [0.5, 1.0, 2.0] {
        for y in [0.5, 1.0, 2.0, 4.0] {
            for nu in [-0.5, 0.0, 0.5, 1.0] {
                rows.push(IdentityRow {
                    identity: "laplace_hankel_a",
                    params: format!("nu={nu} a={a} y={y}"),
                    check: laplace_hankel_a(nu, a, y)?,
                });
                if nu > -0.5 {
                    rows.push(IdentityRow {
                        identity: "laplace_hankel_b",
                        params: format!("nu={nu} a={a} y={y}"),
                        check: laplace_hankel_b(nu, a, y)?,
                    });
                }
            }
        }
    }
    Ok(rows)
}
