//! Command-line front end.

pub mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use conerad::crtf;
use conerad::fields::{window_spec, GridSpec, PadSpec, ScalarField};
use conerad::inversion::invert;
use conerad::rangeops::{check_range, l_apply_fd, l_apply_spectral_eps, RangeTolerances, Theorem};
use conerad::special::identity_sweep;
use conerad::transforms::{
    aux_forward_direct, aux_forward_spectral, aux_forward_spectral_padded, cone_forward_direct,
    cone_forward_spectral, cone_forward_spectral_padded, ConeQuadratureSpec,
};
use conerad::{Error, Result};

use config::{ExperimentConfig, Method, RawConfig};
use output::Slice;

#[derive(Debug, Parser)]
#[command(
    name = "conerad",
    version,
    about = "Attenuated conical Radon transform experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// `key = value` file; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Attenuation coefficient (> 0)
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Opening angle in radians
    #[arg(long, global = true)]
    pub psi: Option<f64>,
    /// Spatial dimension n (the grid has n + 1 axes)
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Samples per axis: one value for all axes or one per axis
    #[arg(
        long,
        global = true,
        value_name = "N[,N...]",
        allow_hyphen_values = true
    )]
    pub grid: Option<String>,
    /// Box per axis as LO,HI pairs; a single pair applies to every axis
    #[arg(
        long,
        global = true,
        value_name = "LO,HI[,...]",
        allow_hyphen_values = true
    )]
    pub extent: Option<String>,
    /// Total padding factor per axis
    #[arg(long, global = true)]
    pub pad: Option<f64>,
    /// Relative amplitude counted as support in range checks
    #[arg(long, global = true)]
    pub eps_support: Option<f64>,
    /// Bound on the weighted moment residual
    #[arg(long, global = true)]
    pub moment_tol: Option<f64>,
    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write a CSV slice with `axis` fixed at the sample nearest `value`
    #[arg(long, global = true, value_name = "AXIS=VALUE")]
    pub slice: Vec<Slice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformKind {
    Cone,
    Aux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Spectral,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the phantom to `f.crtf`
    Phantom,
    /// Forward transform of the phantom to `g.crtf`
    Forward {
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_enum, default_value = "cone")]
        transform: TransformKind,
        /// Keep the padded working grid (spectral only)
        #[arg(long)]
        keep_padding: bool,
    },
    /// Apply `L^k` to a field, writing `lg.crtf`
    #[command(name = "apply-L", alias = "apply-l")]
    ApplyL {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        power: u32,
        /// Finite differences instead of the spectral symbol (power 1 only)
        #[arg(long)]
        fd: bool,
    },
    /// Range test; writes `range_report.csv`
    RangeCheck {
        #[arg(long)]
        theorem: Theorem,
        /// Data to test; defaults to the forward transform of the phantom
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Reconstruct `f` from range data, writing `f_hat.crtf`
    Invert {
        #[arg(long)]
        theorem: Theorem,
        /// Data to invert; defaults to the forward transform of the phantom
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Forward, invert and compare with the phantom; writes `roundtrip.csv`
    Roundtrip {
        /// Defaults to the cone path for the configured dimension
        #[arg(long)]
        theorem: Option<Theorem>,
    },
    /// Special-function identity table, `identities.csv`
    VerifyIdentities,
}

impl GlobalArgs {
    fn overrides(&self, raw: &mut RawConfig) -> Result<()> {
        if let Some(v) = self.mu {
            raw.set("params.mu", v.to_string());
        }
        if let Some(v) = self.psi {
            raw.set("params.psi", v.to_string());
        }
        if let Some(v) = self.dim {
            raw.set("params.n", v.to_string());
        }
        if let Some(v) = &self.grid {
            raw.set("grid.dims", v.clone());
        }
        if let Some(v) = &self.extent {
            let vals: Vec<&str> = v.split(',').map(str::trim).collect();
            if vals.len() < 2 || !vals.len().is_multiple_of(2) {
                return Err(Error::Invalid(format!(
                    "--extent needs LO,HI pairs, got '{v}'"
                )));
            }
            let lo: Vec<&str> = vals.iter().step_by(2).copied().collect();
            let hi: Vec<&str> = vals.iter().skip(1).step_by(2).copied().collect();
            raw.set("grid.lo", lo.join(","));
            raw.set("grid.hi", hi.join(","));
        }
        if let Some(v) = self.pad {
            raw.set("pad.factor", v.to_string());
        }
        if let Some(v) = self.eps_support {
            raw.set("tolerances.eps_support", v.to_string());
        }
        if let Some(v) = self.moment_tol {
            raw.set("tolerances.moment_tol", v.to_string());
        }
        Ok(())
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig> {
    let mut raw = match &cli.global.config {
        Some(path) => RawConfig::parse(&fs::read_to_string(path)?)?,
        None => RawConfig::default(),
    };
    cli.global.overrides(&mut raw)?;
    if let Command::Forward {
        method: Some(m), ..
    } = cli.command
    {
        raw.set(
            "method",
            if m == MethodArg::Direct {
                "direct"
            } else {
                "spectral"
            },
        );
    }
    ExperimentConfig::resolve(raw)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    let cfg = resolve(&cli)?;
    let out = &cli.global.out;
    fs::create_dir_all(out)?;
    fs::write(out.join("config.txt"), cfg.to_text())?;
    let slices = &cli.global.slice;

    match &cli.command {
        Command::Phantom => {
            let f = cfg.phantom.sample(&cfg.grid)?;
            save(out, "f", &f, slices)
        }
        Command::Forward {
            transform,
            keep_padding,
            ..
        } => {
            let g = forward(&cfg, *transform, *keep_padding)?;
            save(out, "g", &g, slices)
        }
        Command::ApplyL { input, power, fd } => {
            let g = crtf::load_real(input)?;
            let lg = if *fd {
                if *power != 1 {
                    return Err(Error::Invalid("--fd supports --power 1 only".into()));
                }
                l_apply_fd(&g, &cfg.params)?
            } else {
                let pad = PadSpec::uniform(g.spec().ndim(), cfg.pad_factor)?;
                l_apply_spectral_eps(&g, &cfg.params, *power, &pad, cfg.tolerances.eps_support)?
            };
            save(out, "lg", &lg, slices)
        }
        Command::RangeCheck { theorem, input } => {
            let data = range_data(&cfg, *theorem, input.as_deref())?;
            let report = check_range(
                &data.g,
                &cfg.params,
                *theorem,
                &data.tolerances,
                &data.padding,
            )?;
            fs::write(out.join("range_report.csv"), report.to_csv())?;
            println!(
                "{theorem}: passed={} support_ok={} moment_residual={:e}",
                report.passed, report.support_ok, report.moment_residual
            );
            Ok(())
        }
        Command::Invert { theorem, input } => {
            let data = range_data(&cfg, *theorem, input.as_deref())?;
            let r = invert(&data.g, &cfg.params, *theorem, &data.padding)?;
            let f_hat = if r.f_hat.spec() == &data.observed {
                r.f_hat.clone()
            } else {
                r.cropped(&data.observed)?
            };
            let mut csv = String::from("key,value\n");
            csv += &format!(
                "theorem,{theorem}\nboundary_decay,{:e}\n",
                r.diagnostics.boundary_decay
            );
            csv += &format!("working_dims,{}\n", dims_text(&r.diagnostics.working_dims));
            fs::write(out.join("invert_report.csv"), csv)?;
            save(out, "f_hat", &f_hat, slices)
        }
        Command::Roundtrip { theorem } => {
            let theorem = theorem.unwrap_or_else(|| Theorem::for_data(true, cfg.params.n));
            let data = range_data(&cfg, theorem, None)?;
            let truth = cfg.phantom.sample(&cfg.grid)?;
            let r = invert(&data.g, &cfg.params, theorem, &data.padding)?.compare(&truth)?;
            let f_hat = r.cropped(&cfg.grid)?;
            let rel = r.rel_l2_error.unwrap_or(f64::NAN);
            let mut csv = String::from("key,value\n");
            csv += &format!(
                "theorem,{theorem}\nrel_l2_error,{rel:e}\nboundary_decay,{:e}\n",
                r.diagnostics.boundary_decay
            );
            csv += &format!("working_dims,{}\n", dims_text(&r.diagnostics.working_dims));
            fs::write(out.join("roundtrip.csv"), csv)?;
            println!("{theorem}: rel_l2_error={rel:e}");
            save(out, "f_hat", &f_hat, slices)
        }
        Command::VerifyIdentities => {
            let rows = identity_sweep()?;
            let mut csv = String::from("identity,params,lhs_re,lhs_im,rhs_re,rhs_im,rel_error\n");
            for r in &rows {
                let c = &r.check;
                csv += &format!(
                    "{},{},{:e},{:e},{:e},{:e},{:e}\n",
                    r.identity, r.params, c.lhs.re, c.lhs.im, c.rhs.re, c.rhs.im, c.rel_error
                );
            }
            fs::write(out.join("identities.csv"), &csv)?;
            let worst = rows.iter().map(|r| r.check.rel_error).fold(0.0, f64::max);
            println!("{} identities, max rel_error {worst:e}", rows.len());
            Ok(())
        }
    }
}

fn dims_text(d: &[usize]) -> String {
    d.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

fn forward(
    cfg: &ExperimentConfig,
    transform: TransformKind,
    keep_padding: bool,
) -> Result<ScalarField> {
    let p = &cfg.params;
    match cfg.method {
        Method::Direct => {
            if keep_padding {
                return Err(Error::Invalid(
                    "--keep-padding applies to the spectral method only".into(),
                ));
            }
            let quad = ConeQuadratureSpec::for_grid(p, &cfg.phantom, &cfg.grid)?;
            info!(
                "direct quadrature: {} z nodes, {} directions",
                quad.z_nodes.len(),
                quad.sphere.len()
            );
            match transform {
                TransformKind::Cone => cone_forward_direct(&cfg.phantom, p, &cfg.grid, &quad),
                TransformKind::Aux => aux_forward_direct(&cfg.phantom, p, &cfg.grid, &quad),
            }
        }
        Method::Spectral => {
            let f = cfg.phantom.sample(&cfg.grid)?;
            let pad = cfg.padding()?;
            match (transform, keep_padding) {
                (TransformKind::Cone, false) => cone_forward_spectral(&f, p, &pad),
                (TransformKind::Cone, true) => cone_forward_spectral_padded(&f, p, &pad),
                (TransformKind::Aux, false) => aux_forward_spectral(&f, p, &pad),
                (TransformKind::Aux, true) => aux_forward_spectral_padded(&f, p, &pad),
            }
        }
    }
}

/// Data for a range check or inversion, with the padding to apply and the
/// box on which results are observed.
struct RangeData {
    g: ScalarField,
    padding: PadSpec,
    tolerances: RangeTolerances,
    observed: GridSpec,
}

fn range_data(cfg: &ExperimentConfig, theorem: Theorem, input: Option<&Path>) -> Result<RangeData> {
    let ndim = cfg.grid.ndim();
    let g = match input {
        Some(path) => crtf::load_real(path)?,
        None => {
            // forward data stays on the working grid; see `Forward --keep-padding`
            let f = cfg.phantom.sample(&cfg.grid)?;
            let pad = cfg.padding()?;
            match theorem {
                Theorem::COdd | Theorem::CEven => {
                    cone_forward_spectral_padded(&f, &cfg.params, &pad)?
                }
                Theorem::AOdd | Theorem::AEven => {
                    aux_forward_spectral_padded(&f, &cfg.params, &pad)?
                }
            }
        }
    };
    if g.spec().ndim() != ndim {
        return Err(Error::Invalid(format!(
            "data has {} axes, configuration has {ndim}",
            g.spec().ndim()
        )));
    }
    let mut tolerances = cfg.tolerances.clone();
    if g.spec() == &cfg.grid {
        // data on the configured box: pad it
        let padding = PadSpec::uniform(ndim, cfg.pad_factor)?;
        return Ok(RangeData {
            g,
            padding,
            tolerances,
            observed: cfg.grid.clone(),
        });
    }
    // data on a larger working grid: operate there and observe the configured box
    let hi: Vec<f64> = (0..ndim).map(|a| cfg.grid.upper(a)).collect();
    let observed = window_spec(g.spec(), cfg.grid.origin(), &hi)?;
    tolerances = tolerances.with_window(cfg.grid.origin().to_vec(), hi);
    Ok(RangeData {
        g,
        padding: PadSpec::none(ndim),
        tolerances,
        observed,
    })
}

fn save(dir: &Path, name: &str, field: &ScalarField, slices: &[Slice]) -> Result<()> {
    crtf::save_real(&dir.join(format!("{name}.crtf")), field)?;
    output::write_csv(dir, name, field, slices)
}
