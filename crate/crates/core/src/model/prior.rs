use std::fmt;

use crate::error::{Error, Result};

/// Default knee `x₀` of the regularized power-law prior.
pub const DEFAULT_KNEE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub enum PriorKind {
    /// `d(x) = θ`.
    Iid,
    /// `θ` up to `s - r`, zero from `s + r`, linear ramp in between.
    Bandlimited { s: f64, r: f64 },
    /// `θ (x₀ / (x₀ + x))^exponent`.
    PowerLaw { exponent: f64, knee: f64 },
    /// Samples of the shape on `[0, 1/2]` inclusive, linearly interpolated.
    /// `source` is the file the samples came from, if any.
    Table { values: Vec<f64>, source: Option<String> },
}

/// Spectral density `d(x)` of the scene covariance, defined on `[0, 1/2]` and
/// mirrored so that `d(x) = d(1 - x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePrior {
    pub theta: f64,
    pub kind: PriorKind,
}

impl ScenePrior {
    pub fn iid(theta: f64) -> Result<Self> {
        Self::new(theta, PriorKind::Iid)
    }

    pub fn bandlimited(theta: f64, s: f64, r: f64) -> Result<Self> {
        Self::new(theta, PriorKind::Bandlimited { s, r })
    }

    pub fn power_law(theta: f64, exponent: f64, knee: f64) -> Result<Self> {
        Self::new(theta, PriorKind::PowerLaw { exponent, knee })
    }

    pub fn table(theta: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(theta, PriorKind::Table { values, source: None })
    }

    pub fn new(theta: f64, kind: PriorKind) -> Result<Self> {
        let prior = Self { theta, kind };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(Error::invalid("theta must be finite and nonnegative"));
        }
        match &self.kind {
            PriorKind::Iid => {}
            PriorKind::Bandlimited { s, r } => {
                if !(*r > 0.0) {
                    return Err(Error::invalid("bandlimited prior needs r > 0"));
                }
                if s + r > 0.5 {
                    return Err(Error::invalid("bandlimited prior needs s + r <= 1/2"));
                }
                if s < r {
                    return Err(Error::invalid("bandlimited prior needs s >= r"));
                }
            }
            PriorKind::PowerLaw { exponent, knee } => {
                if !(*exponent > 0.0 && exponent.is_finite()) {
                    return Err(Error::invalid("power-law exponent must be positive"));
                }
                if !(*knee > 0.0 && knee.is_finite()) {
                    return Err(Error::invalid("power-law knee x0 must be positive"));
                }
            }
            PriorKind::Table { values, .. } => {
                if values.is_empty() {
                    return Err(Error::invalid("table prior has no samples"));
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::invalid("table prior has negative or non-finite samples"));
                }
            }
        }
        Ok(())
    }

    pub fn is_iid(&self) -> bool {
        match &self.kind {
            PriorKind::Iid => true,
            PriorKind::Table { values, .. } => values.iter().all(|v| *v == values[0]),
            _ => false,
        }
    }

    /// `d(x)` for `x ∈ [0, 1]`.
    pub fn density(&self, x: f64) -> f64 {
        let x = if x > 0.5 { 1.0 - x } else { x }.max(0.0);
        let theta = self.theta;
        match &self.kind {
            PriorKind::Iid => theta,
            PriorKind::Bandlimited { s, r } => {
                if x <= s - r {
                    theta
                } else if x >= s + r {
                    0.0
                } else {
                    theta * (s + r - x) / (2.0 * r)
                }
            }
            PriorKind::PowerLaw { exponent, knee } => theta * (knee / (knee + x)).powf(*exponent),
            PriorKind::Table { values, .. } => {
                let shape = interpolate(values, x);
                // Normalize so d(0) = θ; a zero-valued head is used unscaled.
                if values[0] > 0.0 {
                    theta * shape / values[0]
                } else {
                    theta * shape
                }
            }
        }
    }

    /// `d_i = (1/n) d(i/n)` for `i = 0..n`, exactly mirror-symmetric.
    pub fn sample(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        self.validate()?;
        let nf = n as f64;
        Ok((0..n)
            .map(|i| self.density(i.min(n - i) as f64 / nf) / nf)
            .collect())
    }

    /// Separable 2D sampling on an `n × n` grid, row-major:
    /// `d_{jk} = (1/n²) d(j/n) d(k/n) / θ`, so that `d(0, 0) = θ`.
    pub fn sample_2d(&self, n: usize) -> Result<Vec<f64>> {
        let row = self.sample(n)?;
        let scale = if self.theta > 0.0 { 1.0 / self.theta } else { 0.0 };
        Ok(row
            .iter()
            .flat_map(|&dj| row.iter().map(move |&dk| dj * dk * scale))
            .collect())
    }
}

fn interpolate(values: &[f64], x: f64) -> f64 {
    if values.len() == 1 {
        return values[0];
    }
    let pos = (x / 0.5) * (values.len() - 1) as f64;
    let lo = (pos.floor() as usize).min(values.len() - 1);
    let hi = (lo + 1).min(values.len() - 1);
    let frac = pos - lo as f64;
    values[lo] * (1.0 - frac) + values[hi] * frac
}

/// `d_i = (1/n) d(i/n)`.
pub fn sample_prior(prior: &ScenePrior, n: usize) -> Result<Vec<f64>> {
    prior.sample(n)
}

impl fmt::Display for ScenePrior {
    /// One-line prior record, e.g. `prior bandlimited theta=1 s=0.02 r=0.005`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PriorKind::Iid => write!(f, "prior iid theta={}", self.theta),
            PriorKind::Bandlimited { s, r } => {
                write!(f, "prior bandlimited theta={} s={} r={}", self.theta, s, r)
            }
            PriorKind::PowerLaw { exponent, knee } => write!(
                f,
                "prior powerlaw theta={} exponent={} x0={}",
                self.theta, exponent, knee
            ),
            PriorKind::Table { values, source } => match source {
                Some(path) => write!(f, "prior table theta={} table={}", self.theta, path),
                None => write!(f, "prior table theta={} samples={}", self.theta, values.len()),
            },
        }
    }
}
