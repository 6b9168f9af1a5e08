//! Resolved experiment configuration: `key = value` files plus flag overrides.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;
use std::str::FromStr;

use conerad::fields::{GridSpec, PadSpec};
use conerad::phantoms::{Bump, PhantomSpec};
use conerad::rangeops::{RangeTolerances, DEFAULT_EPS_SUPPORT, DEFAULT_MOMENT_TOL};
use conerad::transforms::{transform_padding, TransformParams};
use conerad::{Error, Result};

const DEFAULT_SIZE: usize = 64;
const DEFAULT_HALF_WIDTH: f64 = 2.0;
const DEFAULT_RADIUS: f64 = 0.5;
const DEFAULT_PAD: f64 = 2.0;
/// Spacings added around the phantom box for the default support region.
pub const REGION_CELLS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    Spectral,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "spectral" => Ok(Method::Spectral),
            other => Err(Error::Invalid(format!(
                "unknown method '{other}' (direct, spectral)"
            ))),
        }
    }
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Spectral => "spectral",
        }
    }
}

/// Raw `key -> value` pairs, later entries overriding earlier ones.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Invalid(format!("config line {}: expected 'key = value'", no + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Invalid(format!("config line {}: empty key", no + 1)));
            }
            raw.set(key, value.trim());
        }
        Ok(raw)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn take_parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Invalid(format!("{key}: cannot parse '{v}'"))),
        }
    }
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("{key}: cannot parse '{p}' in '{s}'")))
        })
        .collect()
}

/// One value broadcast to every axis, or one per axis.
fn per_axis<T: FromStr + Clone>(key: &str, s: &str, ndim: usize) -> Result<Vec<T>> {
    let v: Vec<T> = parse_list(key, s)?;
    match v.len() {
        1 => Ok(vec![v[0].clone(); ndim]),
        l if l == ndim => Ok(v),
        l => Err(Error::Invalid(format!(
            "{key}: expected 1 or {ndim} values, got {l}"
        ))),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: TransformParams,
    pub grid: GridSpec,
    pub phantom: PhantomSpec,
    pub pad_factor: f64,
    pub tolerances: RangeTolerances,
    pub method: Method,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Build from raw entries; unknown keys are rejected.
    pub fn resolve(mut raw: RawConfig) -> Result<Self> {
        let mu = raw.take_parsed("params.mu")?.unwrap_or(1.0);
        let psi = raw.take_parsed("params.psi")?.unwrap_or(FRAC_PI_4);
        let n: usize = raw.take_parsed("params.n")?.unwrap_or(1);
        let params = TransformParams::new(mu, psi, n)?;
        let ndim = n + 1;

        let dims = match raw.take("grid.dims") {
            Some(s) => per_axis("grid.dims", &s, ndim)?,
            None => vec![DEFAULT_SIZE; ndim],
        };
        let lo = match raw.take("grid.lo") {
            Some(s) => per_axis("grid.lo", &s, ndim)?,
            None => vec![-DEFAULT_HALF_WIDTH; ndim],
        };
        // spacing wins over hi so echoed configs reproduce the grid bit for bit
        let grid = match (raw.take("grid.spacing"), raw.take("grid.hi")) {
            (Some(_), Some(_)) => {
                return Err(Error::Invalid(
                    "set grid.hi or grid.spacing, not both".into(),
                ))
            }
            (Some(s), None) => GridSpec::new(dims, lo, per_axis("grid.spacing", &s, ndim)?)?,
            (None, Some(s)) => GridSpec::from_extent(&dims, &lo, &per_axis("grid.hi", &s, ndim)?)?,
            (None, None) => GridSpec::from_extent(&dims, &lo, &vec![DEFAULT_HALF_WIDTH; ndim])?,
        };

        let phantom = resolve_phantom(&mut raw, ndim)?;

        let pad_factor = raw.take_parsed("pad.factor")?.unwrap_or(DEFAULT_PAD);
        PadSpec::uniform(ndim, pad_factor)?;

        let (region_lo, region_hi) = match (
            raw.take("tolerances.region_lo"),
            raw.take("tolerances.region_hi"),
        ) {
            (Some(l), Some(h)) => (
                per_axis("tolerances.region_lo", &l, ndim)?,
                per_axis("tolerances.region_hi", &h, ndim)?,
            ),
            (None, None) => default_region(&phantom, &grid),
            _ => {
                return Err(Error::Invalid(
                    "set both tolerances.region_lo and tolerances.region_hi".into(),
                ))
            }
        };
        let mut tolerances = RangeTolerances::new(region_lo, region_hi)?;
        tolerances.eps_support = raw
            .take_parsed("tolerances.eps_support")?
            .unwrap_or(DEFAULT_EPS_SUPPORT);
        tolerances.moment_tol = raw
            .take_parsed("tolerances.moment_tol")?
            .unwrap_or(DEFAULT_MOMENT_TOL);
        tolerances.validate()?;

        let method = raw.take_parsed("method")?.unwrap_or(Method::Spectral);
        if method == Method::Direct && n > 3 {
            return Err(Error::Invalid(format!(
                "method = direct requires n <= 3, got {n}"
            )));
        }
        let seed = raw.take_parsed("seed")?.unwrap_or(0);

        if let Some(key) = raw.entries.keys().next() {
            return Err(Error::Invalid(format!("unknown config key '{key}'")));
        }
        Ok(ExperimentConfig {
            params,
            grid,
            phantom,
            pad_factor,
            tolerances,
            method,
            seed,
        })
    }

    /// Transform padding: uniform factor plus the attenuation margin below.
    pub fn padding(&self) -> Result<PadSpec> {
        transform_padding(&self.params, self.pad_factor)
    }

    /// Canonical text form; parsing it back gives the same configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let _ = writeln!(s, "params.mu = {}", self.params.mu);
        let _ = writeln!(s, "params.psi = {}", self.params.psi);
        let _ = writeln!(s, "params.n = {}", self.params.n);
        let _ = writeln!(s, "grid.dims = {}", join(g.dims()));
        let _ = writeln!(s, "grid.lo = {}", join(g.origin()));
        let _ = writeln!(s, "grid.spacing = {}", join(g.spacing()));
        for (i, b) in self.phantom.terms.iter().enumerate() {
            let _ = writeln!(s, "phantom.bump.{i}.center = {}", join(&b.center));
            let _ = writeln!(s, "phantom.bump.{i}.radius = {}", b.radius);
            let _ = writeln!(s, "phantom.bump.{i}.amplitude = {}", b.amplitude);
        }
        if self.phantom.terms.is_empty() {
            let _ = writeln!(s, "phantom.empty = true");
        }
        let _ = writeln!(s, "pad.factor = {}", self.pad_factor);
        let _ = writeln!(
            s,
            "tolerances.eps_support = {}",
            self.tolerances.eps_support
        );
        let _ = writeln!(s, "tolerances.moment_tol = {}", self.tolerances.moment_tol);
        let _ = writeln!(
            s,
            "tolerances.region_lo = {}",
            join(&self.tolerances.region.0)
        );
        let _ = writeln!(
            s,
            "tolerances.region_hi = {}",
            join(&self.tolerances.region.1)
        );
        let _ = writeln!(s, "method = {}", self.method.name());
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }
}

/// Phantom box inflated by [`REGION_CELLS`] spacings; the whole grid when
/// the phantom is empty.
fn default_region(phantom: &PhantomSpec, grid: &GridSpec) -> (Vec<f64>, Vec<f64>) {
    match phantom.bounding_box() {
        Some((lo, hi)) => {
            let h = grid.spacing();
            (
                lo.iter()
                    .zip(h)
                    .map(|(l, d)| l - REGION_CELLS * d)
                    .collect(),
                hi.iter()
                    .zip(h)
                    .map(|(u, d)| u + REGION_CELLS * d)
                    .collect(),
            )
        }
        None => conerad::rangeops::full_region(grid),
    }
}

fn resolve_phantom(raw: &mut RawConfig, ndim: usize) -> Result<PhantomSpec> {
    let empty: bool = raw.take_parsed("phantom.empty")?.unwrap_or(false);
    let mut indices: Vec<usize> = Vec::new();
    for key in raw.entries.keys() {
        if let Some(rest) = key.strip_prefix("phantom.bump.") {
            let idx = rest
                .split('.')
                .next()
                .and_then(|i| i.parse().ok())
                .ok_or_else(|| Error::Invalid(format!("bad phantom key '{key}'")))?;
            if !indices.contains(&idx) {
                indices.push(idx);
            }
        }
    }
    indices.sort_unstable();
    if empty {
        if !indices.is_empty() {
            return Err(Error::Invalid(
                "phantom.empty = true conflicts with phantom.bump entries".into(),
            ));
        }
        return Ok(PhantomSpec::default());
    }
    if indices.is_empty() {
        return PhantomSpec::single(vec![0.0; ndim], DEFAULT_RADIUS, 1.0);
    }
    let mut terms = Vec::new();
    for i in indices {
        let ck = format!("phantom.bump.{i}.center");
        let center = match raw.take(&ck) {
            Some(s) => per_axis(&ck, &s, ndim)?,
            None => vec![0.0; ndim],
        };
        let radius = raw
            .take_parsed(&format!("phantom.bump.{i}.radius"))?
            .unwrap_or(DEFAULT_RADIUS);
        let amplitude = raw
            .take_parsed(&format!("phantom.bump.{i}.amplitude"))?
            .unwrap_or(1.0);
        terms.push(Bump::new(center, radius, amplitude)?);
    }
    PhantomSpec::new(terms)
}
