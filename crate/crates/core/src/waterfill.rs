//! Waterfilling lower bound on the LMMSE and the search for the optimal
//! transmissivity `ρ*`.
//!
//! For a mask with transmissivity `ρ`, Parseval and `a ∈ [0,1]` cap the power
//! available to the nonzero frequencies at
//! `P = n(⌊nρ⌋ + (nρ - ⌊nρ⌋)²) - n²ρ²`. Spreading that budget to minimize
//! `Σ 1/(1/d_i + γ P_i)` gives `P_i = (T - 1/d_i)⁺ / γ` for a water level `T`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gamma_for, mmse_term, ImagingConfig};

/// Iteration cap for the water-level bisection.
pub const BISECTION_ITERS: usize = 200;
/// Uniform grid size of the `ρ` scan.
pub const RHO_GRID: usize = 1024;
/// Kink points `k/n` are added to the `ρ` scan up to this many pixels.
pub const KINK_SCAN_LIMIT: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    /// Tight budget for `a ∈ [0,1]`, with floors.
    pub exact: f64,
    /// `n²ρ(1-ρ)`, never smaller than `exact`.
    pub simple: f64,
}

/// Nonzero-frequency power budget for `n` pixels at transmissivity `rho`.
pub fn power_budget(n: usize, rho: f64) -> Result<PowerBudget> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid("rho must lie in [0, 1]"));
    }
    let nf = n as f64;
    let mass = nf * rho;
    let whole = mass.floor();
    let frac = mass - whole;
    let simple = nf * nf * rho * (1.0 - rho);
    let exact = (nf * (whole + frac * frac) - mass * mass).clamp(0.0, simple.max(0.0));
    Ok(PowerBudget { exact, simple: simple.max(0.0) })
}

/// Waterfilled spectrum targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAllocation {
    /// Total nonzero-frequency budget `P`.
    pub total: f64,
    /// Water level `T`.
    pub level: f64,
    pub gamma: f64,
    /// `P_i`, with `P_0 = 0`.
    pub targets: Vec<f64>,
    /// `p_j = P_j / Σ P`, with `p_0 = 0`; all zero when `P = 0`.
    pub weights: Vec<f64>,
}

impl SpectrumAllocation {
    fn from_level(d: &[f64], gamma: f64, total: f64, level: f64) -> Self {
        let mut targets = vec![0.0; d.len()];
        for (t, &di) in targets.iter_mut().zip(d).skip(1) {
            if di > 0.0 {
                *t = (level - 1.0 / di).max(0.0) / gamma;
            }
        }
        let sum: f64 = targets.iter().sum();
        let weights = if sum > 0.0 {
            targets.iter().map(|t| t / sum).collect()
        } else {
            vec![0.0; d.len()]
        };
        Self { total, level, gamma, targets, weights }
    }
}

/// Pours `total` over frequencies `1..n` against thresholds `1/d_i`.
///
/// The water level is bracketed in `[0, max 1/d_i + γP]` and bisected; the
/// final level is then recomputed exactly from the active set it identifies.
pub fn waterfill(d: &[f64], gamma: f64, total: f64) -> Result<SpectrumAllocation> {
    if d.len() < 2 {
        return Err(Error::invalid("waterfilling needs at least two frequencies"));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma must be positive and finite"));
    }
    if !(total >= 0.0 && total.is_finite()) {
        return Err(Error::invalid("power budget must be nonnegative and finite"));
    }
    let thresholds: Vec<f64> = d[1..].iter().filter(|&&x| x > 0.0).map(|x| 1.0 / x).collect();
    if total == 0.0 {
        return Ok(SpectrumAllocation::from_level(d, gamma, 0.0, 0.0));
    }
    if thresholds.is_empty() {
        return Err(Error::NowhereToPour);
    }
    let water = gamma * total;
    let poured = |level: f64| -> f64 { thresholds.iter().map(|c| (level - c).max(0.0)).sum() };

    let mut lo = 0.0f64;
    let mut hi = thresholds.iter().copied().fold(0.0, f64::max) + water;
    for _ in 0..BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if poured(mid) < water {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Exact level for the active set; repeat in case the set grows.
    let mut level = 0.5 * (lo + hi);
    for _ in 0..thresholds.len() {
        let (count, sum) = thresholds
            .iter()
            .filter(|&&c| c < level)
            .fold((0usize, 0.0), |(k, s), c| (k + 1, s + c));
        if count == 0 {
            break;
        }
        let next = (water + sum) / count as f64;
        if next == level {
            break;
        }
        let grew = thresholds.iter().filter(|&&c| c < next).count() != count;
        level = next;
        if !grew {
            break;
        }
    }
    Ok(SpectrumAllocation::from_level(d, gamma, total, level))
}

/// Waterfilling lower bound on the LMMSE of any mask with transmissivity `rho`:
/// `1/(1/d_0 + γ n²ρ²) + Σ_{i≥1} 1/(1/d_i + γ P_i)`.
///
/// The pixel count is `d.len()`, so this serves 2D grids with `d` flattened.
pub fn lower_bound(config: &ImagingConfig, d: &[f64], rho: f64) -> Result<f64> {
    LowerBound::new(config, d)?.eval(rho)
}

/// Lower-bound evaluator with the thresholds presorted, so that each `ρ` costs
/// O(n). Uses the closed form of the waterfilled sum: every frequency below
/// the water level contributes exactly `1/T`.
#[derive(Debug, Clone)]
pub struct LowerBound<'a> {
    config: ImagingConfig,
    d: &'a [f64],
    /// `(1/d_i, d_i)` over `i ≥ 1` with `d_i > 0`, ascending in threshold.
    sorted: Vec<(f64, f64)>,
    /// `suffix_mass[k] = Σ_{m ≥ k} sorted[m].1`.
    suffix_mass: Vec<f64>,
    total: f64,
}

impl<'a> LowerBound<'a> {
    pub fn new(config: &ImagingConfig, d: &'a [f64]) -> Result<Self> {
        if d.len() < 2 {
            return Err(Error::invalid("lower bound needs at least two frequencies"));
        }
        if d.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::invalid("prior samples must be finite and nonnegative"));
        }
        let mut sorted: Vec<(f64, f64)> =
            d[1..].iter().filter(|&&x| x > 0.0).map(|&x| (1.0 / x, x)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut suffix_mass = vec![0.0; sorted.len() + 1];
        for k in (0..sorted.len()).rev() {
            suffix_mass[k] = suffix_mass[k + 1] + sorted[k].1;
        }
        Ok(Self { config: *config, d, sorted, suffix_mass, total: d.iter().sum() })
    }

    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid("rho must lie in [0, 1]"));
        }
        if self.config.t == 0.0 || rho == 0.0 {
            return Ok(self.total);
        }
        let noise = self.config.noise(rho);
        if noise <= 0.0 {
            return Err(Error::Noiseless);
        }
        let pixels = self.d.len();
        let gamma = gamma_for(pixels, self.config.t, noise);
        let budget = power_budget(pixels, rho)?.exact;
        let dc = mmse_term(self.d[0], gamma * (pixels as f64 * rho).powi(2));
        Ok(dc + self.waterfilled_sum(gamma * budget))
    }

    /// `min Σ_{i≥1} 1/(1/d_i + x_i)` over `x ≥ 0`, `Σx = water`.
    fn waterfilled_sum(&self, water: f64) -> f64 {
        if water <= 0.0 || self.sorted.is_empty() {
            return self.suffix_mass[0];
        }
        let mut prefix = 0.0;
        let mut active = 0usize;
        let mut level = 0.0;
        for (k, &(c, _)) in self.sorted.iter().enumerate() {
            let candidate = (water + prefix + c) / (k + 1) as f64;
            if k > 0 && c >= level {
                break;
            }
            prefix += c;
            active = k + 1;
            level = candidate;
        }
        active as f64 / level + self.suffix_mass[active]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalRho {
    pub rho: f64,
    pub bound: f64,
}

/// Minimizes the lower bound over `ρ ∈ [0, 1]`.
///
/// Scans a uniform grid of [`RHO_GRID`] points together with the kinks `k/n` of
/// the exact budget, then refines around the best point by golden section.
/// The refinement only replaces the scan result when it is strictly better.
pub fn optimal_rho(config: &ImagingConfig, d: &[f64]) -> Result<OptimalRho> {
    let lb = LowerBound::new(config, d)?;
    let mut candidates: Vec<f64> =
        (0..RHO_GRID).map(|i| i as f64 / (RHO_GRID - 1) as f64).collect();
    let pixels = d.len();
    if pixels <= KINK_SCAN_LIMIT {
        candidates.extend((0..=pixels).map(|k| k as f64 / pixels as f64));
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut best = (0usize, f64::INFINITY);
    for (i, &rho) in candidates.iter().enumerate() {
        let v = lb.eval(rho)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let (idx, mut bound) = best;
    let mut rho = candidates[idx];

    let lo = candidates[idx.saturating_sub(1)];
    let hi = candidates[(idx + 1).min(candidates.len() - 1)];
    if hi > lo {
        let (r, v) = golden_section(|x| lb.eval(x).unwrap_or(f64::INFINITY), lo, hi, 80);
        if v < bound {
            rho = r;
            bound = v;
        }
    }
    Ok(OptimalRho { rho, bound })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
