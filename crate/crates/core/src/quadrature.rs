//! One-dimensional and spherical quadrature rules.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
///
/// Newton iteration on the three-term recurrence; converges to machine
/// precision for any order used in this crate.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    let n = order as f64;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = order as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    if order == 0 {
        (1.0, 0.0)
    } else {
        (p1, d)
    }
}

/// Composite Gauss–Legendre rule on `[lo, hi]` with `panels` equal panels.
/// Nodes are returned in ascending order.
pub fn composite_gauss_legendre(
    lo: f64,
    hi: f64,
    panels: usize,
    order: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let width = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let a = lo + p as f64 * width;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(a + 0.5 * width * (xi + 1.0));
            weights.push(0.5 * width * wi);
        }
    }
    (nodes, weights)
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below `abs_tol` or `max_intervals` is reached.
pub fn adaptive_gk15<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Integral {
    let mut segments = vec![{
        let (v, e) = kronrod15(&f, a, b);
        (a, b, v, e)
    }];
    loop {
        let total_err: f64 = segments.iter().map(|s| s.3).sum();
        if total_err <= abs_tol || segments.len() >= max_intervals {
            break;
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    // sum in interval order so the result does not depend on refinement history
    segments.sort_by(|x, y| x.0.total_cmp(&y.0));
    Integral {
        value: segments.iter().map(|s| s.2).sum(),
        error_estimate: segments.iter().map(|s| s.3).sum(),
        intervals: segments.len(),
    }
}

/// A quadrature rule on the unit sphere `S^{n-1}` embedded in `R^n`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dim: usize,
    /// Unit vectors, `dim` components each, flattened.
    pub directions: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// `S^0 = {-1, +1}` with unit weights.
    pub fn two_point() -> Self {
        SphereRule {
            dim: 1,
            directions: vec![-1.0, 1.0],
            weights: vec![1.0, 1.0],
        }
    }

    /// Uniform trapezoid rule on the circle with `nodes` points.
    pub fn circle(nodes: usize) -> Self {
        let w = 2.0 * PI / nodes as f64;
        let mut directions = Vec::with_capacity(2 * nodes);
        for j in 0..nodes {
            let t = w * j as f64;
            directions.push(t.cos());
            directions.push(t.sin());
        }
        SphereRule {
            dim: 2,
            directions,
            weights: vec![w; nodes],
        }
    }

    /// Product rule on `S^2`: Gauss–Legendre in `cos(theta)` times a uniform
    /// azimuthal rule with twice as many points.
    pub fn sphere_product(polar: usize) -> Self {
        let (c, wc) = gauss_legendre(polar);
        let azimuth = 2 * polar;
        let wphi = 2.0 * PI / azimuth as f64;
        let mut directions = Vec::with_capacity(3 * polar * azimuth);
        let mut weights = Vec::with_capacity(polar * azimuth);
        for (ci, wi) in c.iter().zip(&wc) {
            let s = (1.0 - ci * ci).sqrt();
            for k in 0..azimuth {
                let phi = wphi * (k as f64 + 0.5);
                directions.extend_from_slice(&[s * phi.cos(), s * phi.sin(), *ci]);
                weights.push(wi * wphi);
            }
        }
        SphereRule {
            dim: 3,
            directions,
            weights,
        }
    }

    /// Default rule for dimension `n`: 2 points, 256-point circle, or an
    /// 18x36 product grid (648 points).
    pub fn default_for(n: usize) -> Option<Self> {
        match n {
            1 => Some(Self::two_point()),
            2 => Some(Self::circle(256)),
            3 => Some(Self::sphere_product(18)),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate a complex-valued function of the direction.
    pub fn integrate_complex<F: Fn(&[f64]) -> Complex64>(&self, f: F) -> Complex64 {
        (0..self.len())
            .map(|i| f(self.direction(i)) * self.weights[i])
            .sum()
    }
}

/// Surface measure of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            2.0 * PI.powf(n as f64 / 2.0) / crate::special::gamma(n as f64 / 2.0).expect("positive")
        }
    }
}
