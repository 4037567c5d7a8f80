//! Binary spectrally flat masks from e-th power residues modulo a prime.
//!
//! For the primes below, the indicator of the nonzero e-th power residues
//! (optionally with 0 adjoined) is a cyclic difference set, so its DFT has
//! constant magnitude `k - λ` away from DC:
//!
//! | e | without 0                         | with 0                                |
//! |---|-----------------------------------|---------------------------------------|
//! | 2 | `p ≡ 3 (mod 4)`                   | `p ≡ 3 (mod 4)`                       |
//! | 4 | `p = 4x² + 1`, x odd              | `p = 4x² + 9`, x odd                  |
//! | 8 | `p = 8a² + 1 = 64b² + 9`, a, b odd | `p = 8a² + 49 = 64b² + 441`, a odd, b even |

pub mod arith;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{lmmse_from_power, Aperture, ImagingConfig};
use crate::nazarov::certificate::{self, DesignCertificate, DesignMethod};
use crate::spectra;
use crate::waterfill::optimal_rho;

use arith::{exact_sqrt, is_prime, mod_pow, primes_up_to};

/// Relative tolerance of the flatness check.
pub const FLATNESS_RTOL: f64 = 1e-6;
/// Upper end of the `W/J` grid in [`worst_case_penalty`].
pub const PENALTY_A_MAX: f64 = 1e3;
/// Step of the `W/J` grid in [`worst_case_penalty`].
pub const PENALTY_A_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueFamily {
    pub p: u64,
    pub e: u32,
    pub include_zero: bool,
}

impl ResidueFamily {
    /// Checks that `p` belongs to the difference-set family for `(e, include_zero)`.
    pub fn new(p: u64, e: u32, include_zero: bool) -> Result<Self> {
        if !matches!(e, 2 | 4 | 8) {
            return Err(Error::invalid(format!("residue exponent must be 2, 4 or 8, got {e}")));
        }
        if !(p % 2 == 1 && is_prime(p)) {
            return Err(Error::invalid(format!("{p} is not an odd prime")));
        }
        let family = Self { p, e, include_zero };
        if !family.condition_holds() {
            return Err(Error::invalid(format!(
                "p = {p} is not in the e = {e} family{}",
                if include_zero { " with zero" } else { "" }
            )));
        }
        Ok(family)
    }

    fn condition_holds(&self) -> bool {
        let p = self.p;
        match (self.e, self.include_zero) {
            (2, _) => p % 4 == 3,
            (4, false) => odd_root(p, 1, 4).is_some(),
            (4, true) => odd_root(p, 9, 4).is_some(),
            (8, false) => odd_root(p, 1, 8).is_some() && odd_root(p, 9, 64).is_some(),
            (8, true) => {
                odd_root(p, 49, 8).is_some() && root(p, 441, 64).is_some_and(|b| b % 2 == 0)
            }
            _ => false,
        }
    }

    /// Number of ones `k`.
    pub fn ones(&self) -> u64 {
        (self.p - 1) / self.e as u64 + self.include_zero as u64
    }

    /// `ρ = k / p`.
    pub fn rho(&self) -> f64 {
        self.ones() as f64 / self.p as f64
    }

    /// `λ = k(k-1)/(p-1)`.
    pub fn lambda(&self) -> f64 {
        let k = self.ones() as f64;
        k * (k - 1.0) / (self.p - 1) as f64
    }

    /// `|â_j|² = k - λ` for `j ≠ 0`.
    pub fn flat_level(&self) -> f64 {
        self.ones() as f64 - self.lambda()
    }
}

/// `r` with `p = offset + scale r²`.
fn root(p: u64, offset: u64, scale: u64) -> Option<u64> {
    let rest = p.checked_sub(offset)?;
    if rest % scale != 0 {
        return None;
    }
    exact_sqrt(rest / scale)
}

fn odd_root(p: u64, offset: u64, scale: u64) -> Option<u64> {
    root(p, offset, scale).filter(|r| r % 2 == 1)
}

/// Indicator of the nonzero e-th power residues mod `p` (plus 0 when asked).
/// The spectrum is checked to be flat; a failure is an error.
pub fn residue_sequence(family: &ResidueFamily) -> Result<Aperture> {
    let family = ResidueFamily::new(family.p, family.e, family.include_zero)?;
    let values = residue_indicator(family.p, family.e, family.include_zero);
    let power = spectra::power_spectrum(&values)?;
    let spread = flatness_spread(&power);
    if spread > FLATNESS_RTOL {
        return Err(Error::NotFlat { p: family.p, e: family.e, spread });
    }
    Aperture::mask(values)
}

/// Raw indicator, without family checks.
pub(crate) fn residue_indicator(p: u64, e: u32, include_zero: bool) -> Vec<f64> {
    let exp = (p - 1) / e as u64;
    let mut values: Vec<f64> = (0..p)
        .map(|i| if i != 0 && mod_pow(i, exp, p) == 1 { 1.0 } else { 0.0 })
        .collect();
    if include_zero {
        values[0] = 1.0;
    }
    values
}

/// `(max - min) / mean` of `power[1..]`.
pub(crate) fn flatness_spread(power: &[f64]) -> f64 {
    let tail = &power[1..];
    if tail.is_empty() {
        return 0.0;
    }
    let (lo, hi, sum) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &v| {
            (lo.min(v), hi.max(v), s + v)
        });
    (hi - lo) / (sum / tail.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueLength {
    pub p: u64,
    pub include_zero: bool,
    pub ones: u64,
    pub rho: f64,
}

impl From<ResidueFamily> for ResidueLength {
    fn from(f: ResidueFamily) -> Self {
        Self { p: f.p, include_zero: f.include_zero, ones: f.ones(), rho: f.rho() }
    }
}

/// All primes `≤ n_max` admitting an e-th power residue difference set,
/// sorted by `p`. Quadratic residues are listed without zero only; quartic and
/// octic lists include both families.
pub fn find_residue_lengths(e: u32, n_max: u64) -> Result<Vec<ResidueLength>> {
    let mut out: Vec<ResidueFamily> = match e {
        2 => primes_up_to(n_max as usize)
            .into_iter()
            .filter(|p| p % 4 == 3)
            .map(|p| ResidueFamily { p, e, include_zero: false })
            .collect(),
        4 => [(1u64, false), (9, true)]
            .into_iter()
            .flat_map(|(offset, include_zero)| {
                (1u64..)
                    .step_by(2)
                    .map(move |x| (4 * x * x + offset, include_zero))
                    .take_while(move |(p, _)| *p <= n_max)
            })
            .filter(|(p, _)| is_prime(*p))
            .map(|(p, include_zero)| ResidueFamily { p, e, include_zero })
            .collect(),
        // Enumerate b in p = 64b² + c and test the companion form.
        8 => [(9u64, 1u64, false), (441, 49, true)]
            .into_iter()
            .flat_map(|(c, offset, include_zero)| {
                (0u64..)
                    .map(move |b| (64 * b * b + c, include_zero))
                    .take_while(move |(p, _)| *p <= n_max)
                    .filter(move |(p, _)| odd_root(*p, offset, 8).is_some())
            })
            .map(|(p, include_zero)| ResidueFamily { p, e, include_zero })
            .filter(|f| is_prime(f.p) && f.condition_holds())
            .collect(),
        _ => return Err(Error::invalid(format!("residue exponent must be 2, 4 or 8, got {e}"))),
    };
    out.sort_by_key(|f| (f.p, f.include_zero));
    Ok(out.into_iter().map(ResidueLength::from).collect())
}

/// Every residue family of length `n`.
pub fn families_at(n: usize) -> Vec<ResidueFamily> {
    let mut out = Vec::new();
    for e in [2, 4, 8] {
        for include_zero in [false, true] {
            if let Ok(f) = ResidueFamily::new(n as u64, e, include_zero) {
                out.push(f);
            }
        }
    }
    out
}

/// `f_a(x) = x(1-x)/(a+x)`, read as `1 - x` at `a = 0`.
fn tradeoff(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        1.0 - x
    } else if a.is_infinite() {
        x * (1.0 - x)
    } else {
        x * (1.0 - x) / (a + x)
    }
}

/// Maximizer `√(a² + a) - a` of `f_a` on `[0, 1]`.
pub fn best_transmissivity(a: f64) -> f64 {
    if a.is_infinite() {
        return 0.5;
    }
    // a / (√(a²+a) + a) avoids cancellation for large a
    let x = a / ((a * a + a).sqrt() + a);
    if a == 0.0 {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

/// Exposure loss `sup_x f_a(x) / f_a(ρ)` of using transmissivity `rho` when the
/// noise ratio is `a = W/J`. `a = ∞` is the thermal-only limit.
pub fn loss_factor(a: f64, rho: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::invalid("noise ratio a must be nonnegative"));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid("rho must lie in (0, 1)"));
    }
    let best = tradeoff(a, best_transmissivity(a));
    Ok((best / tradeoff(a, rho)).max(1.0))
}

/// `sup_a min_{ρ ∈ set} loss_factor(a, ρ)` over `a ∈ [0, 10³]` at step `10⁻³`.
pub fn worst_case_penalty(rho_set: &[f64]) -> Result<f64> {
    if rho_set.is_empty() {
        return Err(Error::invalid("rho set is empty"));
    }
    let steps = (PENALTY_A_MAX / PENALTY_A_STEP).round() as usize;
    let mut worst = 1.0f64;
    for i in 0..=steps {
        let a = i as f64 * PENALTY_A_STEP;
        let mut best = f64::INFINITY;
        for &rho in rho_set {
            best = best.min(loss_factor(a, rho)?);
        }
        worst = worst.max(best);
    }
    Ok(worst)
}

/// A residue mask with its certificate.
#[derive(Debug, Clone)]
pub struct FlatDesign {
    pub aperture: Aperture,
    pub family: ResidueFamily,
    pub certificate: DesignCertificate,
}

/// Picks the residue family at `config.n` with the smallest exposure loss for
/// the configured `W/J`, and certifies it against the lower bound.
pub fn flat_design(config: &ImagingConfig, d: &[f64]) -> Result<FlatDesign> {
    let n = config.n;
    if d.len() != n {
        return Err(Error::invalid("prior length does not match n"));
    }
    let ratio = config.noise_ratio();
    let family = families_at(n)
        .into_iter()
        .map(|f| Ok((loss_factor(ratio, f.rho())?, f)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, f)| f)
        .ok_or(Error::NoResidueFamily(n))?;
    let penalty = loss_factor(ratio, family.rho())?;
    let aperture = residue_sequence(&family)?;
    let rho = aperture.rho();

    let mut notes = Vec::new();
    if d.iter().any(|&x| x != d[0]) {
        notes.push("prior is not i.i.d.; the exposure guarantee assumes a flat prior".into());
    }
    let achieved = aperture.power_spectrum()?;
    let level = family.flat_level();
    let mut thresholds = vec![level * (1.0 - FLATNESS_RTOL); n];
    thresholds[0] = 0.0;
    let flat = flatness_spread(&achieved) <= FLATNESS_RTOL;

    let opt = optimal_rho(config, d)?;
    let penalized = lmmse_from_power(&config.with_exposure(config.t * penalty), d, &achieved, rho)?;
    let bound_met = certificate::bound_met(penalized, opt.bound);
    let required = certificate::required_penalty(config, d, &achieved, rho, opt.bound)?;
    let thresholds_met = flat && certificate::thresholds_met(&achieved, &thresholds);
    if !bound_met {
        notes.push(format!(
            "bound missed at the asymptotic penalty by the finite-n DC term; needs {}",
            required.map_or("more than 1e9".into(), |c| format!("{c:.9}"))
        ));
    }

    let certificate = DesignCertificate {
        method: DesignMethod::Flat,
        n,
        dims: 1,
        rho_star: opt.rho,
        rho,
        achieved,
        thresholds,
        thresholds_met,
        m_bound: None,
        sup_norm: None,
        coefficient_margin: None,
        penalty,
        lower_bound: opt.bound,
        lmmse_penalized: penalized,
        bound_met,
        required_penalty: required,
        exact_budget_met: None,
        seed: None,
        restarts: 0,
        sweeps: 0,
        converged: true,
        notes,
        pass: thresholds_met,
    };
    Ok(FlatDesign { aperture, family, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn legendre_seven() {
        let f = ResidueFamily::new(7, 2, false).unwrap();
        let a = residue_sequence(&f).unwrap();
        assert_eq!(a.values, vec![0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        assert_relative_eq!(f.flat_level(), 2.0);
        let p = a.power_spectrum().unwrap();
        assert_relative_eq!(p[0], 9.0, max_relative = 1e-12);
    }

    #[test]
    fn family_conditions() {
        assert!(ResidueFamily::new(7, 2, false).is_ok());
        assert!(ResidueFamily::new(13, 2, false).is_err());
        assert!(ResidueFamily::new(677, 4, false).is_ok());
        assert!(ResidueFamily::new(13, 4, true).is_ok());
        assert!(ResidueFamily::new(13, 4, false).is_err());
        assert!(ResidueFamily::new(73, 8, false).is_ok());
        assert!(ResidueFamily::new(26041, 8, true).is_ok());
        assert!(ResidueFamily::new(26041, 8, false).is_err());
        assert!(ResidueFamily::new(9, 2, false).is_err());
        assert!(ResidueFamily::new(7, 3, false).is_err());
    }

    #[test]
    fn octic_73_is_flat() {
        let f = ResidueFamily::new(73, 8, false).unwrap();
        let a = residue_sequence(&f).unwrap();
        assert_eq!(a.ones(), 9);
        assert_relative_eq!(f.flat_level(), 8.0);
    }

    #[test]
    fn quadratic_lengths_below_thirty() {
        let ps: Vec<u64> = find_residue_lengths(2, 30).unwrap().iter().map(|r| r.p).collect();
        assert_eq!(ps, vec![3, 7, 11, 19, 23]);
        assert!(find_residue_lengths(3, 30).is_err());
    }

    #[test]
    fn shot_limited_loss_factors() {
        assert_abs_diff_eq!(loss_factor(0.0, 0.5).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(loss_factor(0.0, 0.25).unwrap(), 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(loss_factor(0.0, 0.125).unwrap(), 8.0 / 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(loss_factor(f64::INFINITY, 0.5).unwrap(), 1.0, epsilon = 1e-12);
        assert!(loss_factor(1.0, 0.0).is_err());
    }

    #[test]
    fn loss_is_one_only_at_the_optimum() {
        for a in [0.01, 0.3, 1.0, 7.5, 200.0] {
            let x = best_transmissivity(a);
            assert_abs_diff_eq!(loss_factor(a, x).unwrap(), 1.0, epsilon = 1e-12);
            for rho in [0.05, 0.2, 0.5, 0.8] {
                if (rho - x).abs() > 1e-3 {
                    assert!(loss_factor(a, rho).unwrap() > 1.0);
                }
            }
        }
    }

    #[test]
    fn flat_design_rejects_lengths_without_family() {
        let c = ImagingConfig::new(8, 100.0, 1e-3, 1e-3).unwrap();
        assert!(matches!(flat_design(&c, &[1.0 / 8.0; 8]), Err(Error::NoResidueFamily(8))));
    }

    #[test]
    fn flat_design_picks_least_loss() {
        // p = 7 has QR (ρ = 3/7) and QR ∪ {0} (ρ = 4/7); shot-dominant noise wants low ρ
        let c = ImagingConfig::new(7, 1e3, 1e-5, 1e-3).unwrap();
        let fd = flat_design(&c, &[1.0 / 7.0; 7]).unwrap();
        assert_eq!(fd.family, ResidueFamily { p: 7, e: 2, include_zero: false });
        assert_relative_eq!(
            fd.certificate.penalty,
            loss_factor(0.01, 3.0 / 7.0).unwrap(),
            max_relative = 1e-12
        );
    }
}
