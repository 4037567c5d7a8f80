//! `aperture` command line.
//!
//! Exit codes: 0 on success, 2 on invalid input, 3 when a certificate fails.

pub mod bruteforce;
pub mod sweep;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::flatseq::{find_residue_lengths, flat_design};
use crate::io::{load_prior, read_aperture, write_aperture};
use crate::model::{lmmse, Aperture, ApertureKind, Dims, ImagingConfig, ScenePrior};
use crate::nazarov::{
    design_aperture, design_aperture_2d, nazarov_2d, DesignCertificate, DesignOptions,
    DEFAULT_2D_CAP,
};
use crate::spectra::{beta, m_bound, penalty_db};
use crate::waterfill::lower_bound;

use bruteforce::{bruteforce_binary, epsilon_family};
use sweep::{run_sweep, Method, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "aperture", version, about = "Coded-aperture mask design and evaluation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design a mask and certify it.
    Design(DesignArgs),
    /// LMMSE of a mask file (or the ideal lens).
    Evaluate(EvaluateArgs),
    /// Exposure sweep as CSV.
    Sweep(SweepArgs),
    /// Exhaustive search over binary masks.
    Bruteforce(BruteArgs),
    /// Table of β(n), M(n) and the 2M(n)² exposure penalty.
    Beta(BetaArgs),
    /// Lengths with a flat e-th power residue construction.
    Residues(ResidueArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Noise {
    /// Exposure time.
    #[arg(long)]
    pub t: f64,
    /// Thermal noise power.
    #[arg(long = "W", default_value_t = 1e-3)]
    pub w: f64,
    /// Shot noise power.
    #[arg(long = "J", default_value_t = 1e-3)]
    pub j: f64,
    /// Inline record (`prior iid theta=1`) or a file holding one.
    #[arg(long, default_value = "prior iid theta=1")]
    pub prior: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Nazarov,
    Flat,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub noise: Noise,
    #[arg(long, value_enum, default_value = "nazarov")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// 1 for a sequence, 2 for an n×n grid.
    #[arg(long, default_value_t = 1)]
    pub dims: u8,
    #[arg(long, default_value_t = DesignOptions::default().restarts)]
    pub restarts: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Certificate as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Aperture file.
    #[arg(long, required_unless_present = "ideal_lens")]
    pub aperture: Option<PathBuf>,
    /// Evaluate `â_j = n` instead of a file; needs --n.
    #[arg(long, requires = "n")]
    pub ideal_lens: bool,
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub noise: Noise,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long = "W", default_value_t = 1e-3)]
    pub w: f64,
    #[arg(long = "J", default_value_t = 1e-3)]
    pub j: f64,
    #[arg(long, default_value = "prior iid theta=1")]
    pub prior: String,
    #[arg(long, default_value_t = sweep::DEFAULT_T_MIN)]
    pub t_min: f64,
    #[arg(long, default_value_t = sweep::DEFAULT_T_MAX)]
    pub t_max: f64,
    #[arg(long, default_value_t = sweep::DEFAULT_T_COUNT)]
    pub count: usize,
    /// Comma-separated subset of lowerbound,flat,nazarov,random.
    #[arg(long, value_delimiter = ',', default_value = "lowerbound,flat,nazarov,random")]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = sweep::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Compute rows on one thread.
    #[arg(long)]
    pub serial: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BruteArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub ones: usize,
    #[arg(long)]
    pub t: f64,
    #[arg(long = "W", default_value_t = 1e-3)]
    pub w: f64,
    #[arg(long = "J", default_value_t = 1e-3)]
    pub j: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    /// Also score the continuous family `a_0 = ε`, residues `1 - ε/6`.
    #[arg(long)]
    pub epsilon_family: bool,
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.26,0.3,0.34,0.4,0.5")]
    pub epsilon: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    #[arg(long, conflicts_with = "n_max", required_unless_present = "n_max")]
    pub n: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ResidueArgs {
    #[arg(long)]
    pub e: u32,
    #[arg(long)]
    pub n_max: u64,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::CertificateFailed { .. } => EXIT_CERTIFICATE,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Design(a) => cmd_design(&a, out),
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Bruteforce(a) => cmd_bruteforce(&a, out),
        Command::Beta(a) => cmd_beta(&a, out),
        Command::Residues(a) => cmd_residues(&a, out),
    }
}

fn config_of(n: usize, noise: &Noise) -> Result<(ImagingConfig, ScenePrior)> {
    Ok((ImagingConfig::new(n, noise.t, noise.w, noise.j)?, load_prior(&noise.prior)?))
}

fn cmd_design(a: &DesignArgs, out: &mut dyn Write) -> Result<i32> {
    let (config, prior) = config_of(a.n, &a.noise)?;
    let opts = DesignOptions { seed: a.seed, restarts: a.restarts, ..DesignOptions::default() };
    let (aperture, cert): (Aperture, DesignCertificate) = match (a.dims, a.method) {
        (1, MethodArg::Flat) => {
            let d = prior.sample(a.n)?;
            let fd = flat_design(&config, &d)?;
            (fd.aperture, fd.certificate)
        }
        (1, MethodArg::Nazarov) => {
            let d = prior.sample(a.n)?;
            let nd = design_aperture(&config, &d, &opts)?;
            (nd.aperture, nd.certificate)
        }
        (2, m) => {
            let d = prior.sample_2d(a.n)?;
            let r = match m {
                MethodArg::Flat => {
                    if crate::flatseq::families_at(a.n).is_empty() {
                        return Err(Error::NoResidueFamily(a.n));
                    }
                    crate::nazarov::flat_product_2d(&config, &d)?
                }
                MethodArg::Nazarov if prior.is_iid() => {
                    design_aperture_2d(&config, &d, &opts, DEFAULT_2D_CAP)?
                }
                MethodArg::Nazarov => nazarov_2d(&config, &d, &opts, DEFAULT_2D_CAP)?,
            };
            (r.aperture, r.certificate)
        }
        (d, _) => return Err(Error::invalid(format!("dims must be 1 or 2, got {d}"))),
    };
    if let Some(path) = &a.out {
        write_aperture(path, &aperture)?;
    }
    if let Some(path) = &a.report {
        std::fs::write(path, cert.to_json() + "\n")?;
    }
    writeln!(out, "{cert}")?;
    if a.out.is_none() {
        write!(out, "{}", crate::io::format_aperture(&aperture)?)?;
    }
    Ok(if cert.pass { EXIT_OK } else { EXIT_CERTIFICATE })
}

fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<i32> {
    let aperture = if a.ideal_lens {
        Aperture::lens(a.n.ok_or_else(|| Error::invalid("--ideal-lens needs --n"))?)
    } else {
        let path = a.aperture.as_ref().ok_or_else(|| Error::invalid("--aperture is required"))?;
        read_aperture(path)?
    };
    let n = aperture.side();
    if let Some(want) = a.n {
        if want != n {
            return Err(Error::invalid(format!("--n {want} does not match the aperture side {n}")));
        }
    }
    let (config, prior) = config_of(n, &a.noise)?;
    let d = match aperture.dims {
        Dims::One => prior.sample(n)?,
        Dims::Two(_) => prior.sample_2d(n)?,
    };
    let value = lmmse(&config, &d, &aperture)?;
    let rho = aperture.rho();
    writeln!(out, "lmmse {}", sig12(value))?;
    writeln!(out, "rho {}", sig12(rho))?;
    // The bound is over masks; the lens is outside that set.
    if d.len() >= 2 && aperture.kind == ApertureKind::Mask {
        writeln!(out, "lower_bound_at_rho {}", sig12(lower_bound(&config, &d, rho)?))?;
    }
    Ok(EXIT_OK)
}

/// Twelve significant digits.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<i32> {
    let methods = a.methods.iter().map(|m| m.trim().parse()).collect::<Result<Vec<Method>>>()?;
    let spec = SweepSpec {
        n: a.n,
        prior: load_prior(&a.prior)?,
        w: a.w,
        j: a.j,
        t_min: a.t_min,
        t_max: a.t_max,
        count: a.count,
        methods,
        trials: a.trials,
        seed: a.seed,
    };
    let csv = run_sweep(&spec, !a.serial)?.to_csv();
    match &a.out {
        Some(path) => std::fs::write(path, csv)?,
        None => write!(out, "{csv}")?,
    }
    Ok(EXIT_OK)
}

fn cmd_bruteforce(a: &BruteArgs, out: &mut dyn Write) -> Result<i32> {
    let config = ImagingConfig::new(a.n, a.t, a.w, a.j)?;
    let d = ScenePrior::iid(a.theta)?.sample(a.n)?;
    let r = bruteforce_binary(&config, &d, a.ones)?;
    let mask: Vec<String> = r.best.iter().map(u8::to_string).collect();
    writeln!(out, "n {} ones {} masks {} classes {}", r.n, r.ones, r.masks, r.classes)?;
    writeln!(out, "best {}", mask.join(""))?;
    writeln!(out, "best_lmmse {}", sig12(r.best_lmmse))?;
    writeln!(out, "tied_classes {}", r.ties.len())?;
    for t in &r.ties {
        let t: Vec<String> = t.iter().map(u8::to_string).collect();
        writeln!(out, "tie {}", t.join(""))?;
    }
    if a.epsilon_family {
        for &eps in &a.epsilon {
            let v = lmmse(&config, &d, &epsilon_family(a.n, eps)?)?;
            let tag = if v < r.best_lmmse { "better" } else { "worse" };
            writeln!(out, "epsilon {eps} lmmse {} {tag}", sig12(v))?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_beta(a: &BetaArgs, out: &mut dyn Write) -> Result<i32> {
    let range = match (a.n, a.n_max) {
        (Some(n), _) => n..=n,
        (None, Some(m)) => 1..=m,
        (None, None) => return Err(Error::invalid("give --n or --n-max")),
    };
    if *range.start() == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    writeln!(out, "n beta M penalty_db")?;
    for n in range {
        let m = m_bound(n);
        writeln!(out, "{n} {:.12} {:.12} {:.4}", beta(n), m, penalty_db(m))?;
    }
    Ok(EXIT_OK)
}

fn cmd_residues(a: &ResidueArgs, out: &mut dyn Write) -> Result<i32> {
    writeln!(out, "p k rho zero")?;
    for r in find_residue_lengths(a.e, a.n_max)? {
        writeln!(out, "{} {} {:.6} {}", r.p, r.ones, r.rho, r.include_zero)?;
    }
    Ok(EXIT_OK)
}
