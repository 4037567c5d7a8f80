//! Coefficient-problem solver and the masks built from it.
//!
//! For weights `p_j ≥ 0` summing to one there is a `b` with `‖b‖_∞ ≤ M(n)` and
//! `|(b, ψ_j)|² ≥ p_j` for every `j`. We look for it as `b = M(n) sgn(g)` where
//! `g = Σ ε_j √p_j ψ_j` and the sign cortège `ε` is a local maximum of `|g|_1`
//! under single flips. The result is checked, not assumed: a failed check
//! restarts the search from a fresh random cortège.
//!
//! With `p` taken from the waterfilled spectrum targets, `a = (b + M)/(2M)` is a
//! mask whose LMMSE at exposure `2M(n)² t` is no worse than the best achievable
//! at exposure `t`.

mod basis;
pub mod certificate;
mod greedy;
mod twod;

pub use basis::{PlaneWaveBasis, ProductBasis, RealBasis};
pub use certificate::{DesignCertificate, DesignMethod};
pub use greedy::{GreedyOutcome, DEFAULT_MAX_SWEEPS, IMPROVEMENT_EPS};
pub use twod::{
    design_aperture_2d, flat_product_2d, nazarov_2d, product_weights, solve_coefficient_problem_2d,
    Design2d, DEFAULT_2D_CAP,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_seed, gamma_for, lmmse_from_power, Aperture, ImagingConfig};
use crate::spectra::{m_bound, BasisSpec};
use crate::waterfill::{optimal_rho, power_budget, waterfill, SpectrumAllocation};

use greedy::{combination, greedy_on, potential_on};

/// Default number of restarts after the first attempt.
pub const DEFAULT_RESTARTS: usize = 16;
/// Slack on `Σ p_j = 1`.
pub const TARGET_SUM_TOL: f64 = 1e-12;

/// Weights `p_j ≥ 0` with `Σ p_j = 1`, one per basis function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTarget {
    pub weights: Vec<f64>,
}

impl SpectrumTarget {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput);
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("target weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > TARGET_SUM_TOL * weights.len().max(1) as f64 {
            return Err(Error::invalid(format!("target weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// Rescales nonnegative weights to sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::invalid("target weights must have a positive finite sum"));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    /// All mass on basis index `j`.
    pub fn point(n: usize, j: usize) -> Result<Self> {
        if j >= n {
            return Err(Error::IndexOutOfRange { index: j, len: n });
        }
        let mut w = vec![0.0; n];
        w[j] = 1.0;
        Self::new(w)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&j| self.weights[j] > 0.0).collect()
    }
}

/// Signs `ε_j ∈ {-1, +1}` over the support of a target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCortege {
    pub support: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignCortege {
    pub fn new(support: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if support.len() != signs.len() {
            return Err(Error::invalid("support and signs differ in length"));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::invalid("cortège entries must be ±1"));
        }
        Ok(Self { support, signs })
    }

    /// All `+1` over the target's support.
    pub fn positive(target: &SpectrumTarget) -> Self {
        let support = target.support();
        let signs = vec![1; support.len()];
        Self { support, signs }
    }

    pub(crate) fn check_against(&self, target: &SpectrumTarget) -> Result<()> {
        if self.support != target.support() {
            return Err(Error::invalid("cortège support does not match the target"));
        }
        if self.signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::invalid("cortège entries must be ±1"));
        }
        Ok(())
    }
}

/// `|g|_1` for `g = Σ ε_j √p_j ψ_j` on the 1D basis of length `p.len()`.
pub fn potential(target: &SpectrumTarget, cortege: &SignCortege) -> Result<f64> {
    potential_on(&BasisSpec::new(target.weights.len())?, target, cortege)
}

/// Greedy single-flip ascent of the potential from a seeded random cortège.
pub fn greedy_cortege(target: &SpectrumTarget, seed: u64, max_sweeps: usize) -> Result<GreedyOutcome> {
    greedy_on(&BasisSpec::new(target.weights.len())?, target, seed, max_sweeps)
}

/// How the bounded vector was obtained from `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transfer {
    /// `b = M sgn(g)`.
    Sign,
    /// `b = M clip(g/δ, -1, 1)`; linear when `δ ≥ ‖g‖_∞`.
    Clip { delta: f64 },
}

/// Ratio between successive clip levels tried after the sign map.
pub const CLIP_RATIO: f64 = 0.85;
/// Number of clip levels tried below `‖g‖_∞`.
pub const CLIP_LEVELS: usize = 40;

/// `b` with `‖b‖_∞ ≤ M` together with the outcome of the coefficient checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedVector {
    pub values: Vec<f64>,
    pub m: f64,
    pub transfer: Transfer,
    pub sup_norm: f64,
    /// `(b, ψ_j)` for every `j`.
    pub coefficients: Vec<f64>,
    /// `min |(b, ψ_j)|² / p_j` over the support (infinite for an empty support).
    pub margin: f64,
    /// Whether `b` was negated to make `(b, ψ_0) ≤ 0`.
    pub negated: bool,
    pub verified: bool,
}

fn check_transfer<B: RealBasis>(
    basis: &B,
    target: &SpectrumTarget,
    support: &[usize],
    mut values: Vec<f64>,
    m: f64,
    transfer: Transfer,
) -> Result<BoundedVector> {
    let negated = values.iter().sum::<f64>() > 0.0;
    if negated {
        values.iter_mut().for_each(|v| *v = -*v);
    }
    let coefficients = basis.coefficients(&values)?;
    let margin = support
        .iter()
        .map(|&j| coefficients[j].powi(2) / target.weights[j])
        .fold(f64::INFINITY, f64::min);
    let sup_norm = values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let verified = sup_norm <= m + 1e-9 && margin >= 1.0 - 1e-12;
    Ok(BoundedVector { values, m, transfer, sup_norm, coefficients, margin, negated, verified })
}

/// `b = M sgn(g)` with `sgn(0) = +1`, negated if its mean is positive.
pub(crate) fn sign_on<B: RealBasis>(
    basis: &B,
    target: &SpectrumTarget,
    cortege: &SignCortege,
    m: f64,
) -> Result<BoundedVector> {
    cortege.check_against(target)?;
    let g = combination(basis, target, cortege);
    let values = g.iter().map(|&x| if x < 0.0 { -m } else { m }).collect();
    check_transfer(basis, target, &cortege.support, values, m, Transfer::Sign)
}

/// Sign map first; if that misses a coefficient, clipped maps
/// `M clip(g/δ)` for `δ = ‖g‖_∞ r^k`. The first verified vector is returned,
/// else the one with the largest margin.
pub(crate) fn bounded_on<B: RealBasis>(
    basis: &B,
    target: &SpectrumTarget,
    cortege: &SignCortege,
    m: f64,
) -> Result<BoundedVector> {
    let sign = sign_on(basis, target, cortege, m)?;
    if sign.verified {
        return Ok(sign);
    }
    let g = combination(basis, target, cortege);
    let top = g.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut best = sign;
    if top == 0.0 {
        return Ok(best);
    }
    let mut delta = top;
    for _ in 0..CLIP_LEVELS {
        let values = g.iter().map(|&x| m * (x / delta).clamp(-1.0, 1.0)).collect();
        let b = check_transfer(basis, target, &cortege.support, values, m, Transfer::Clip { delta })?;
        if b.verified {
            return Ok(b);
        }
        if b.margin > best.margin {
            best = b;
        }
        delta *= CLIP_RATIO;
    }
    Ok(best)
}

/// `b = M sgn(g)` only, checked against `|(b, ψ_j)|² ≥ p_j`.
pub fn sign_transfer(target: &SpectrumTarget, cortege: &SignCortege) -> Result<BoundedVector> {
    let n = target.weights.len();
    sign_on(&BasisSpec::new(n)?, target, cortege, m_bound(n))
}

/// Turns a cortège into a bounded vector with `‖b‖_∞ ≤ M(n)` and checks
/// `|(b, ψ_j)|² ≥ p_j`; `verified` is false when every transfer fails.
pub fn cortege_to_bounded(target: &SpectrumTarget, cortege: &SignCortege) -> Result<BoundedVector> {
    let n = target.weights.len();
    bounded_on(&BasisSpec::new(n)?, target, cortege, m_bound(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    pub seed: u64,
    pub max_sweeps: usize,
    /// Restarts allowed after the first attempt.
    pub restarts: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self { seed: 0, max_sweeps: DEFAULT_MAX_SWEEPS, restarts: DEFAULT_RESTARTS }
    }
}

impl DesignOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    /// Seed of attempt `r`; attempt 0 uses the base seed.
    pub fn attempt_seed(&self, r: usize) -> u64 {
        if r == 0 {
            self.seed
        } else {
            derive_seed(self.seed, 0x5EED, r as u64)
        }
    }
}

#[derive(Debug, Clone)]
pub struct NazarovDesign {
    pub aperture: Aperture,
    pub certificate: DesignCertificate,
    pub allocation: Option<SpectrumAllocation>,
    pub target: SpectrumTarget,
    pub bounded: BoundedVector,
    pub greedy: GreedyOutcome,
}

/// Waterfilling targets at the optimal transmissivity.
pub(crate) struct Plan {
    pub rho_star: f64,
    pub bound: f64,
    pub budget_exact: f64,
    pub allocation: Option<SpectrumAllocation>,
}

pub(crate) fn plan(config: &ImagingConfig, d: &[f64]) -> Result<Plan> {
    let opt = optimal_rho(config, d)?;
    let pixels = d.len();
    let budget = power_budget(pixels, opt.rho)?;
    let noise = config.noise(opt.rho);
    let gamma = if noise > 0.0 { gamma_for(pixels, config.t, noise) } else { 0.0 };
    let allocation = if gamma > 0.0 && budget.exact > 0.0 {
        match waterfill(d, gamma, budget.exact) {
            Ok(a) if a.targets.iter().any(|&t| t > 0.0) => Some(a),
            Ok(_) | Err(Error::NowhereToPour) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(Plan { rho_star: opt.rho, bound: opt.bound, budget_exact: budget.exact, allocation })
}

/// Everything the shared attempt loop needs to know about one geometry.
pub(crate) struct Geometry<'a, B: RealBasis> {
    pub basis: &'a B,
    pub m: f64,
    pub method: DesignMethod,
    pub dims: u8,
    pub side: usize,
    pub power: &'a dyn Fn(&[f64]) -> Result<Vec<f64>>,
    pub wrap: &'a dyn Fn(Vec<f64>) -> Result<Aperture>,
}

pub(crate) struct Attempt {
    pub aperture: Aperture,
    pub certificate: DesignCertificate,
    pub bounded: BoundedVector,
    pub greedy: GreedyOutcome,
}

/// Greedy + saturation + certificate, with restarts.
pub(crate) fn attempt_loop<B: RealBasis>(
    geo: &Geometry<'_, B>,
    config: &ImagingConfig,
    d: &[f64],
    plan: &Plan,
    target: &SpectrumTarget,
    opts: &DesignOptions,
) -> Result<Attempt> {
    let pixels = d.len() as f64;
    let m = geo.m;
    let rho_star = plan.rho_star;
    let targets: Vec<f64> = match &plan.allocation {
        Some(a) => a.targets.clone(),
        None => vec![0.0; d.len()],
    };
    let simple = 4.0 * m * m * rho_star * (1.0 - rho_star);
    let thresholds: Vec<f64> =
        targets.iter().map(|&p| if p > 0.0 && simple > 0.0 { p / simple } else { 0.0 }).collect();
    let exact_thresholds: Vec<f64> = targets
        .iter()
        .map(|&p| {
            if p > 0.0 && plan.budget_exact > 0.0 {
                pixels * pixels * p / (4.0 * m * m * plan.budget_exact)
            } else {
                0.0
            }
        })
        .collect();
    let penalty = 2.0 * m * m;
    let boosted = config.with_exposure(config.t * penalty);

    let mut last_reason = String::from("no attempt made");
    for r in 0..=opts.restarts {
        let seed = opts.attempt_seed(r);
        let greedy = greedy_on(geo.basis, target, seed, opts.max_sweeps)?;
        let bounded = bounded_on(geo.basis, target, &greedy.cortege, m)?;
        if !bounded.verified {
            last_reason = format!(
                "seed {seed}: coefficient margin {:.6} < 1 or sup norm {:.6} > M = {:.6}",
                bounded.margin, bounded.sup_norm, m
            );
            continue;
        }
        let values: Vec<f64> =
            bounded.values.iter().map(|&b| ((b + m) / (2.0 * m)).clamp(0.0, 1.0)).collect();
        let aperture = (geo.wrap)(values)?;
        let rho = aperture.rho();
        let achieved = (geo.power)(&aperture.values)?;
        let met = certificate::thresholds_met(&achieved, &thresholds);
        let exact_met = certificate::thresholds_met(&achieved, &exact_thresholds);
        let penalized = lmmse_from_power(&boosted, d, &achieved, rho)?;
        let bound_met = certificate::bound_met(penalized, plan.bound);
        let rho_ok = rho <= 0.5 + 1e-9;
        let pass = met && bound_met && rho_ok && bounded.verified;
        let mut notes = Vec::new();
        if plan.allocation.is_none() {
            notes.push("no power to allocate at rho*; uniform target used".into());
        }
        if !greedy.converged {
            notes.push(format!("greedy stopped at the {}-sweep cap", opts.max_sweeps));
        }
        if let Transfer::Clip { delta } = bounded.transfer {
            notes.push(format!("sign map missed a coefficient; clipped at delta = {delta:.6e}"));
        }
        if !rho_ok {
            notes.push(format!("rho(a) = {rho} exceeds 1/2"));
        }
        let certificate = DesignCertificate {
            method: geo.method,
            n: geo.side,
            dims: geo.dims,
            rho_star,
            rho,
            achieved,
            thresholds: thresholds.clone(),
            thresholds_met: met,
            m_bound: Some(m),
            sup_norm: Some(bounded.sup_norm),
            coefficient_margin: Some(bounded.margin),
            penalty,
            lower_bound: plan.bound,
            lmmse_penalized: penalized,
            bound_met,
            required_penalty: None,
            exact_budget_met: Some(exact_met),
            seed: Some(seed),
            restarts: r,
            sweeps: greedy.sweeps,
            converged: greedy.converged,
            notes,
            pass,
        };
        if pass {
            return Ok(Attempt { aperture, certificate, bounded, greedy });
        }
        last_reason = format!(
            "seed {seed}: thresholds {met}, bound {bound_met} ({penalized:.6e} vs {:.6e}), rho {rho:.6}",
            plan.bound
        );
    }
    Err(Error::CertificateFailed { restarts: opts.restarts, reason: last_reason })
}

/// Prior-adapted mask for any `n ≥ 2` with a passing certificate.
pub fn design_aperture(
    config: &ImagingConfig,
    d: &[f64],
    opts: &DesignOptions,
) -> Result<NazarovDesign> {
    let n = config.n;
    if n < 2 {
        return Err(Error::invalid("design needs n >= 2"));
    }
    if d.len() != n {
        return Err(Error::invalid("prior length does not match n"));
    }
    let basis = BasisSpec::new(n)?;
    let plan = plan(config, d)?;
    let target = match &plan.allocation {
        Some(a) => SpectrumTarget::normalized(a.weights.clone())?,
        None => SpectrumTarget::normalized((0..n).map(|j| if j == 0 { 0.0 } else { 1.0 }).collect())?,
    };
    let power = |v: &[f64]| crate::spectra::power_spectrum(v);
    let wrap = |v: Vec<f64>| Aperture::mask(v);
    let geo = Geometry {
        basis: &basis,
        m: m_bound(n),
        method: DesignMethod::Nazarov,
        dims: 1,
        side: n,
        power: &power,
        wrap: &wrap,
    };
    let mut attempt = attempt_loop(&geo, config, d, &plan, &target, opts)?;
    attempt.certificate.required_penalty = certificate::required_penalty(
        config,
        d,
        &attempt.certificate.achieved,
        attempt.certificate.rho,
        plan.bound,
    )?;
    Ok(NazarovDesign {
        aperture: attempt.aperture,
        certificate: attempt.certificate,
        allocation: plan.allocation,
        target,
        bounded: attempt.bounded,
        greedy: attempt.greedy,
    })
}
