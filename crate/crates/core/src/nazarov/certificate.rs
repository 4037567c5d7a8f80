use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{lmmse_from_power, ImagingConfig};

/// Relative slack on the penalized-LMMSE check.
pub const BOUND_RTOL: f64 = 1e-9;
/// Relative slack on per-frequency thresholds.
pub const THRESHOLD_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignMethod {
    Flat,
    Nazarov,
    FlatProduct2d,
    Nazarov2d,
}

impl fmt::Display for DesignMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignMethod::Flat => "flat",
            DesignMethod::Nazarov => "nazarov",
            DesignMethod::FlatProduct2d => "flat-product-2d",
            DesignMethod::Nazarov2d => "nazarov-2d",
        })
    }
}

/// Numerical re-check of a design's guarantees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignCertificate {
    pub method: DesignMethod,
    pub n: usize,
    pub dims: u8,
    /// Transmissivity that minimizes the lower bound.
    pub rho_star: f64,
    /// Transmissivity of the returned mask.
    pub rho: f64,
    /// Achieved `|â_j|²`, index 0 included.
    pub achieved: Vec<f64>,
    /// Required `|â_j|²` (0 where nothing is required, always at index 0).
    pub thresholds: Vec<f64>,
    pub thresholds_met: bool,
    /// Sup-norm constant of the coefficient problem, if one was solved.
    pub m_bound: Option<f64>,
    /// `‖b‖_∞` of the bounded vector behind the mask.
    pub sup_norm: Option<f64>,
    /// Smallest `|(b, ψ_j)|² / p_j` over the target support.
    pub coefficient_margin: Option<f64>,
    /// Guaranteed exposure multiplier.
    pub penalty: f64,
    /// Minimum of the lower bound over `ρ` at the nominal exposure.
    pub lower_bound: f64,
    /// LMMSE of the mask at `penalty × t`.
    pub lmmse_penalized: f64,
    pub bound_met: bool,
    /// Smallest multiplier that actually meets the bound, if one exists below 1e9.
    pub required_penalty: Option<f64>,
    /// Thresholds recomputed with the tight budget instead of `n²ρ(1-ρ)`.
    pub exact_budget_met: Option<bool>,
    pub seed: Option<u64>,
    pub restarts: usize,
    pub sweeps: usize,
    pub converged: bool,
    pub notes: Vec<String>,
    /// Every threshold met and `‖b‖_∞ ≤ M`. Coefficient designs also require
    /// `ρ(a) ≤ 1/2` and the penalized bound; for residue masks the bound is
    /// reported in `bound_met` but does not gate `pass`.
    pub pass: bool,
}

impl DesignCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    /// Worst `achieved / threshold` over frequencies with a positive threshold.
    pub fn worst_ratio(&self) -> Option<f64> {
        self.achieved
            .iter()
            .zip(&self.thresholds)
            .filter(|(_, &t)| t > 0.0)
            .map(|(a, t)| a / t)
            .fold(None, |m, r| Some(m.map_or(r, |m: f64| m.min(r))))
    }
}

pub(crate) fn thresholds_met(achieved: &[f64], thresholds: &[f64]) -> bool {
    achieved
        .iter()
        .zip(thresholds)
        .all(|(&a, &t)| a >= t * (1.0 - THRESHOLD_RTOL) - 1e-12)
}

pub(crate) fn bound_met(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + BOUND_RTOL)
}

/// Smallest exposure multiplier `c ≥ 1` with `lmmse(c t) ≤ bound`, by
/// bisection on `log c`. `None` when even `c = 1e9` falls short.
pub(crate) fn required_penalty(
    config: &ImagingConfig,
    d: &[f64],
    power: &[f64],
    rho: f64,
    bound: f64,
) -> Result<Option<f64>> {
    let at = |c: f64| lmmse_from_power(&config.with_exposure(config.t * c), d, power, rho);
    if config.t == 0.0 {
        return Ok(bound_met(at(1.0)?, bound).then_some(1.0));
    }
    if bound_met(at(1.0)?, bound) {
        return Ok(Some(1.0));
    }
    let (mut lo, mut hi) = (0.0f64, 9.0f64);
    if !bound_met(at(10f64.powf(hi))?, bound) {
        return Ok(None);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if bound_met(at(10f64.powf(mid))?, bound) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(10f64.powf(hi)))
}

impl fmt::Display for DesignCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method            {}", self.method)?;
        writeln!(f, "n                 {} ({}D)", self.n, self.dims)?;
        writeln!(f, "rho*              {:.6}", self.rho_star)?;
        writeln!(f, "rho(a)            {:.6}", self.rho)?;
        if let Some(m) = self.m_bound {
            writeln!(f, "M                 {:.6}", m)?;
        }
        if let Some(s) = self.sup_norm {
            writeln!(f, "|b|_inf           {:.6}", s)?;
        }
        if let Some(c) = self.coefficient_margin {
            writeln!(f, "coef margin       {:.6}", c)?;
        }
        match self.worst_ratio() {
            Some(r) => writeln!(f, "thresholds        {} (worst ratio {:.4})", ok(self.thresholds_met), r)?,
            None => writeln!(f, "thresholds        {}", ok(self.thresholds_met))?,
        }
        writeln!(f, "penalty           {:.6} ({:.2} dB)", self.penalty, 10.0 * self.penalty.log10())?;
        if let Some(r) = self.required_penalty {
            writeln!(f, "needed penalty    {:.6}", r)?;
        }
        writeln!(f, "lower bound       {:.12e}", self.lower_bound)?;
        writeln!(f, "lmmse(penalty*t)  {:.12e} {}", self.lmmse_penalized, ok(self.bound_met))?;
        if let Some(seed) = self.seed {
            writeln!(f, "seed              {}", seed)?;
            writeln!(f, "restarts          {}", self.restarts)?;
            writeln!(f, "sweeps            {} (converged: {})", self.sweeps, self.converged)?;
        }
        for note in &self.notes {
            writeln!(f, "note              {}", note)?;
        }
        write!(f, "certificate       {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "VIOLATED"
    }
}
