//! Exposure sweeps written as self-describing CSV.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flatseq::flat_design;
use crate::model::{lmmse, ImagingConfig, RandomEnsemble, ScenePrior};
use crate::nazarov::{design_aperture, DesignOptions};
use crate::waterfill::optimal_rho;

pub const CSV_HEADER: &str =
    "t,lmmse_lowerbound,lmmse_flat,lmmse_nazarov,lmmse_random_mean,rho_star,rho_random_star,seed";
/// Densities tried for the random baseline: `0, 0.05, .., 1`.
pub const RANDOM_RHO_GRID: usize = 21;
pub const DEFAULT_TRIALS: usize = 10;
pub const DEFAULT_T_MIN: f64 = 1e2;
pub const DEFAULT_T_MAX: f64 = 1e7;
pub const DEFAULT_T_COUNT: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    LowerBound,
    Flat,
    Nazarov,
    Random,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lowerbound" => Ok(Method::LowerBound),
            "flat" => Ok(Method::Flat),
            "nazarov" => Ok(Method::Nazarov),
            "random" => Ok(Method::Random),
            other => Err(Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LowerBound => "lowerbound",
            Method::Flat => "flat",
            Method::Nazarov => "nazarov",
            Method::Random => "random",
        }
    }

    pub fn all() -> Vec<Method> {
        vec![Method::LowerBound, Method::Flat, Method::Nazarov, Method::Random]
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub n: usize,
    pub prior: ScenePrior,
    pub w: f64,
    pub j: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
}

impl SweepSpec {
    /// Defaults: `W = J = 1e-3`, all methods.
    pub fn new(n: usize, prior: ScenePrior) -> Self {
        Self {
            n,
            prior,
            w: 1e-3,
            j: 1e-3,
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
            count: DEFAULT_T_COUNT,
            methods: Method::all(),
            trials: DEFAULT_TRIALS,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min.is_finite()) {
            return Err(Error::invalid("t_min must be positive"));
        }
        if !(self.t_max > self.t_min && self.t_max.is_finite()) {
            return Err(Error::invalid("t_max must exceed t_min"));
        }
        if self.count < 2 {
            return Err(Error::invalid("a sweep needs at least two exposures"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods selected"));
        }
        if self.n < 2 {
            return Err(Error::invalid("sweeps need n >= 2"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        ImagingConfig::new(self.n, 1.0, self.w, self.j)?;
        self.prior.validate()
    }

    /// Log-spaced exposures, strictly increasing, endpoints exact.
    pub fn exposures(&self) -> Vec<f64> {
        let (a, b) = (self.t_min.ln(), self.t_max.ln());
        let last = self.count - 1;
        (0..self.count)
            .map(|i| match i {
                0 => self.t_min,
                i if i == last => self.t_max,
                i => (a + (b - a) * i as f64 / last as f64).exp(),
            })
            .collect()
    }

    fn has(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub lowerbound: Option<f64>,
    pub flat: Option<f64>,
    pub nazarov: Option<f64>,
    pub random_mean: Option<f64>,
    pub rho_star: Option<f64>,
    pub rho_random_star: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
    pub notes: Vec<String>,
}

/// Runs the sweep. Rows are independent; `parallel` only changes scheduling.
pub fn run_sweep(spec: &SweepSpec, parallel: bool) -> Result<SweepTable> {
    spec.validate()?;
    let d = spec.prior.sample(spec.n)?;
    let mut notes = Vec::new();
    let flat_ok = spec.has(Method::Flat) && !crate::flatseq::families_at(spec.n).is_empty();
    if spec.has(Method::Flat) && !flat_ok {
        notes.push(format!("flat: no residue family at n = {}; column left empty", spec.n));
    }
    let ensemble = if spec.has(Method::Random) {
        let grid: Vec<f64> =
            (0..RANDOM_RHO_GRID).map(|i| i as f64 / (RANDOM_RHO_GRID - 1) as f64).collect();
        Some(RandomEnsemble::draw(spec.n, &grid, spec.trials, spec.seed)?)
    } else {
        None
    };

    let row = |t: f64| -> Result<SweepRow> {
        let config = ImagingConfig::new(spec.n, t, spec.w, spec.j)?;
        let opt = if spec.has(Method::LowerBound) || spec.has(Method::Nazarov) {
            Some(optimal_rho(&config, &d)?)
        } else {
            None
        };
        let flat = if flat_ok {
            let fd = flat_design(&config, &d)?;
            Some(lmmse(&config, &d, &fd.aperture)?)
        } else {
            None
        };
        let nazarov = if spec.has(Method::Nazarov) {
            let nd = design_aperture(&config, &d, &DesignOptions::with_seed(spec.seed))?;
            Some(lmmse(&config, &d, &nd.aperture)?)
        } else {
            None
        };
        let random = match &ensemble {
            Some(e) => Some(e.best(&config, &d)?),
            None => None,
        };
        Ok(SweepRow {
            t,
            lowerbound: opt.filter(|_| spec.has(Method::LowerBound)).map(|o| o.bound),
            flat,
            nazarov,
            random_mean: random.map(|r| r.mean_lmmse),
            rho_star: opt.map(|o| o.rho),
            rho_random_star: random.map(|r| r.rho),
            seed: spec.seed,
        })
    };

    let ts = spec.exposures();
    let rows = if parallel {
        ts.par_iter().map(|&t| row(t)).collect::<Result<Vec<_>>>()?
    } else {
        ts.iter().map(|&t| row(t)).collect::<Result<Vec<_>>>()?
    };
    Ok(SweepTable { spec: spec.clone(), rows, notes })
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let s = &self.spec;
        let mut out = String::new();
        let methods: Vec<&str> = s.methods.iter().map(|m| m.name()).collect();
        let _ = writeln!(out, "# n={}", s.n);
        let _ = writeln!(out, "# {}", s.prior);
        let _ = writeln!(out, "# W={} J={}", s.w, s.j);
        let _ = writeln!(out, "# t_min={} t_max={} count={} spacing=log", s.t_min, s.t_max, s.count);
        let _ = writeln!(out, "# methods={}", methods.join(","));
        let _ = writeln!(
            out,
            "# trials={} seed={} random_rho_grid={}",
            s.trials, s.seed, RANDOM_RHO_GRID
        );
        for note in &self.notes {
            let _ = writeln!(out, "# note: {note}");
        }
        let _ = writeln!(out, "{CSV_HEADER}");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:e},{},{},{},{},{},{},{}",
                r.t,
                cell(r.lowerbound),
                cell(r.flat),
                cell(r.nazarov),
                cell(r.random_mean),
                cell(r.rho_star),
                cell(r.rho_random_star),
                r.seed
            );
        }
        out
    }
}
