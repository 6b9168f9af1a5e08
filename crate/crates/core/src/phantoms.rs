//! Smooth compactly supported test functions.

use log::warn;

use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField};

/// `amplitude * exp(1 - 1 / (1 - |p - center|^2 / radius^2))` inside the
/// ball, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: Vec<f64>, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Invalid(format!(
                "bump radius must be positive, got {radius}"
            )));
        }
        if !amplitude.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid(
                "bump center and amplitude must be finite".into(),
            ));
        }
        Ok(Bump {
            center,
            radius,
            amplitude,
        })
    }

    fn scaled_dist_sq(&self, p: &[f64]) -> f64 {
        let r2: f64 = self
            .center
            .iter()
            .zip(p)
            .map(|(c, x)| (x - c) * (x - c))
            .sum();
        r2 / (self.radius * self.radius)
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        let s = self.scaled_dist_sq(p);
        if s >= 1.0 {
            return 0.0;
        }
        self.amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
    }

    /// Partial derivative along `axis`.
    pub fn derivative(&self, p: &[f64], axis: usize) -> f64 {
        let s = self.scaled_dist_sq(p);
        if s >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - s;
        let b = self.amplitude * (1.0 - 1.0 / u).exp();
        -b * 2.0 * (p[axis] - self.center[axis]) / (self.radius * self.radius * u * u)
    }
}

/// Sum of bumps in `R^{n+1}`, last coordinate `z`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhantomSpec {
    pub terms: Vec<Bump>,
}

impl PhantomSpec {
    pub fn new(terms: Vec<Bump>) -> Result<Self> {
        if let Some(d) = terms.first().map(|b| b.center.len()) {
            if terms.iter().any(|b| b.center.len() != d) {
                return Err(Error::Invalid("bump centers have mixed dimensions".into()));
            }
        }
        Ok(PhantomSpec { terms })
    }

    pub fn single(center: Vec<f64>, radius: f64, amplitude: f64) -> Result<Self> {
        Self::new(vec![Bump::new(center, radius, amplitude)?])
    }

    /// Number of coordinates, or `None` for an empty phantom.
    pub fn ndim(&self) -> Option<usize> {
        self.terms.first().map(|b| b.center.len())
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        self.terms.iter().map(|b| b.eval(p)).sum()
    }

    /// Analytic `d/dz` (last coordinate).
    pub fn eval_dz(&self, p: &[f64]) -> f64 {
        let z = p.len() - 1;
        self.terms.iter().map(|b| b.derivative(p, z)).sum()
    }

    /// Bounding box of the union of supports; `None` when there are no terms.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let d = self.ndim()?;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for b in &self.terms {
            for a in 0..d {
                lo[a] = lo[a].min(b.center[a] - b.radius);
                hi[a] = hi[a].max(b.center[a] + b.radius);
            }
        }
        Some((lo, hi))
    }

    fn check_grid(&self, spec: &GridSpec) -> Result<()> {
        if let Some(d) = self.ndim() {
            if d != spec.ndim() {
                return Err(Error::Invalid(format!(
                    "phantom has {d} coordinates, grid has {}",
                    spec.ndim()
                )));
            }
        }
        if let Some((lo, hi)) = self.bounding_box() {
            let inside =
                (0..spec.ndim()).all(|a| lo[a] > spec.origin()[a] && hi[a] < spec.upper(a));
            if !inside {
                warn!("phantom support is not strictly inside the grid box");
            }
        }
        Ok(())
    }

    pub fn sample(&self, spec: &GridSpec) -> Result<ScalarField> {
        self.check_grid(spec)?;
        Ok(ScalarField::from_fn(spec.clone(), |p| self.eval(p)))
    }

    pub fn sample_dz(&self, spec: &GridSpec) -> Result<ScalarField> {
        self.check_grid(spec)?;
        Ok(ScalarField::from_fn(spec.clone(), |p| self.eval_dz(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{norms, support_box};

    #[test]
    fn bump_values() {
        let b = Bump::new(vec![0.2, -0.1], 0.5, 3.0).unwrap();
        assert_eq!(b.eval(&[0.2, -0.1]), 3.0);
        assert_eq!(b.eval(&[0.7, -0.1]), 0.0);
        assert_eq!(b.eval(&[5.0, 5.0]), 0.0);
        let off = 0.5 / 2f64.sqrt();
        assert!((b.eval(&[0.2 + off, -0.1]) - 3.0 * (-1f64).exp()).abs() < 1e-15);
        assert!(Bump::new(vec![0.0], 0.0, 1.0).is_err());
    }

    #[test]
    fn zero_amplitude_samples_to_zero() {
        let g = GridSpec::from_extent(&[8, 8], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let p = PhantomSpec::single(vec![0.0, 0.0], 0.5, 0.0).unwrap();
        assert!(p.sample(&g).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn support_within_ball_box() {
        let g = GridSpec::from_extent(&[64, 64], &[-2.0, -2.0], &[2.0, 2.0]).unwrap();
        let p = PhantomSpec::single(vec![0.3, -0.2], 1.0, 1.0).unwrap();
        let b = support_box(&p.sample(&g).unwrap(), 1e-6).unwrap().unwrap();
        let h = g.spacing()[0];
        assert!(b.lo[0] >= -0.7 - h && b.hi[0] <= 1.3 + h);
        assert!(b.lo[1] >= -1.2 - h && b.hi[1] <= 0.8 + h);
    }

    #[test]
    fn disjoint_bumps_add_in_quadrature() {
        let g = GridSpec::from_extent(&[200, 100], &[-2.0, -1.0], &[2.0, 1.0]).unwrap();
        let a = PhantomSpec::single(vec![-1.0, 0.0], 0.6, 1.0).unwrap();
        let b = PhantomSpec::single(vec![1.0, 0.1], 0.5, -2.0).unwrap();
        let both = PhantomSpec::new(vec![a.terms[0].clone(), b.terms[0].clone()]).unwrap();
        let na = norms(&a.sample(&g).unwrap()).l2;
        let nb = norms(&b.sample(&g).unwrap()).l2;
        let nab = norms(&both.sample(&g).unwrap()).l2;
        assert!((nab - (na * na + nb * nb).sqrt()).abs() < 1e-12 * nab);
    }

    #[test]
    fn dz_converges_at_second_order() {
        let p = PhantomSpec::single(vec![0.0, 0.1, -0.2], 0.8, 1.5).unwrap();
        let pts = [[0.1, 0.2, 0.1], [-0.3, 0.0, -0.5], [0.2, 0.3, 0.0]];
        let err = |h: f64| {
            pts.iter()
                .map(|x| {
                    let up = [x[0], x[1], x[2] + h];
                    let dn = [x[0], x[1], x[2] - h];
                    ((p.eval(&up) - p.eval(&dn)) / (2.0 * h) - p.eval_dz(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let order = (e1 / e2).log2();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }

    #[test]
    fn mismatched_dimensions() {
        let g = GridSpec::from_extent(&[8, 8], &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let p = PhantomSpec::single(vec![0.0, 0.0, 0.0], 0.5, 1.0).unwrap();
        assert!(p.sample(&g).is_err());
        let bad = PhantomSpec::new(vec![
            Bump::new(vec![0.0, 0.0], 0.5, 1.0).unwrap(),
            Bump::new(vec![0.0], 0.5, 1.0).unwrap(),
        ]);
        assert!(bad.is_err());
    }
}
