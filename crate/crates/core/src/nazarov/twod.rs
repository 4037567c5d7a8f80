//! Square-grid masks: product of two flat sequences, or the coefficient
//! problem over the product basis `ψ_j ⊗ ψ_k` with `M_2D(n) = (3π/2) β(n)^-4`.

use super::basis::{PlaneWaveBasis, ProductBasis, RealBasis};
use super::certificate::{self, DesignCertificate, DesignMethod};
use super::{attempt_loop, bounded_on, greedy_on, plan, BoundedVector, DesignOptions, Geometry};
use super::{SpectrumTarget, DEFAULT_RESTARTS};
use crate::error::{Error, Result};
use crate::flatseq::{families_at, flatness_spread, loss_factor, residue_sequence, FLATNESS_RTOL};
use crate::model::{lmmse_from_power, Aperture, ImagingConfig};
use crate::spectra::{dft2, m_bound_2d};
use crate::waterfill::{optimal_rho, SpectrumAllocation};

/// Largest side accepted by the 2D greedy (`n²` signs).
pub const DEFAULT_2D_CAP: usize = 128;
/// Restarts spent on the product basis before switching to plane waves.
pub const PRODUCT_RESTARTS: usize = 3;

#[derive(Debug, Clone)]
pub struct Design2d {
    pub aperture: Aperture,
    pub certificate: DesignCertificate,
    pub allocation: Option<SpectrumAllocation>,
}

fn check_grid(config: &ImagingConfig, d: &[f64], cap: usize) -> Result<usize> {
    let n = config.n;
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if d.len() != n * n {
        return Err(Error::invalid(format!("2D prior has {} samples, expected {}", d.len(), n * n)));
    }
    Ok(n)
}

/// Preferred 2D design: the flat product for a constant prior when a residue
/// family exists at `n`, else the coefficient-problem design.
pub fn design_aperture_2d(
    config: &ImagingConfig,
    d: &[f64],
    opts: &DesignOptions,
    cap: usize,
) -> Result<Design2d> {
    let n = check_grid(config, d, cap)?;
    if n == 1 {
        return single_pixel(config, d);
    }
    let iid = d.iter().all(|&x| x == d[0]);
    if iid && !families_at(n).is_empty() {
        return flat_product_2d(config, d);
    }
    nazarov_2d(config, d, opts, cap)
}

/// 1×1 grid: the open pixel is optimal since `ρ²/(W + Jρ)` increases in `ρ`.
fn single_pixel(config: &ImagingConfig, d: &[f64]) -> Result<Design2d> {
    let aperture = Aperture::mask_2d(vec![1.0], 1)?;
    let value = lmmse_from_power(config, d, &[1.0], 1.0)?;
    let certificate = DesignCertificate {
        method: DesignMethod::Nazarov2d,
        n: 1,
        dims: 2,
        rho_star: 1.0,
        rho: 1.0,
        achieved: vec![1.0],
        thresholds: vec![0.0],
        thresholds_met: true,
        m_bound: None,
        sup_norm: None,
        coefficient_margin: None,
        penalty: 1.0,
        lower_bound: value,
        lmmse_penalized: value,
        bound_met: true,
        required_penalty: Some(1.0),
        exact_budget_met: None,
        seed: None,
        restarts: 0,
        sweeps: 0,
        converged: true,
        notes: vec!["single pixel; the open mask is optimal".into()],
        pass: true,
    };
    Ok(Design2d { aperture, certificate, allocation: None })
}

/// Outer product `s sᵀ` of the least-loss residue mask at `n`. Its spectrum is
/// `|ŝ_u|² |ŝ_v|²`: flat off the DC row and column. The exposure penalty is
/// found numerically.
pub fn flat_product_2d(config: &ImagingConfig, d: &[f64]) -> Result<Design2d> {
    let n = check_grid(config, d, usize::MAX)?;
    let ratio = config.noise_ratio();
    let family = families_at(n)
        .into_iter()
        .map(|f| Ok((loss_factor(ratio, f.rho() * f.rho())?, f)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, f)| f)
        .ok_or(Error::NoResidueFamily(n))?;
    let s = residue_sequence(&family)?.values;
    let values: Vec<f64> = s.iter().flat_map(|&r| s.iter().map(move |&c| r * c)).collect();
    let aperture = Aperture::mask_2d(values, n)?;
    let rho = aperture.rho();
    let achieved = dft2(&aperture.values, n)?.power();

    let level = family.flat_level();
    let k = family.ones() as f64;
    let mut thresholds = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            let want = match (u == 0, v == 0) {
                (true, true) => 0.0,
                (true, false) | (false, true) => k * k * level,
                (false, false) => level * level,
            };
            thresholds[u * n + v] = want * (1.0 - FLATNESS_RTOL);
        }
    }
    let interior: Vec<f64> = (1..n)
        .flat_map(|u| (1..n).map(move |v| (u, v)))
        .map(|(u, v)| achieved[u * n + v])
        .collect();
    let flat = interior.len() < 2 || flatness_spread_all(&interior) <= FLATNESS_RTOL;
    let thresholds_met = flat && certificate::thresholds_met(&achieved, &thresholds);

    let opt = optimal_rho(config, d)?;
    let required = certificate::required_penalty(config, d, &achieved, rho, opt.bound)?;
    let penalty = required.unwrap_or(f64::INFINITY);
    let penalized = match required {
        Some(c) => lmmse_from_power(&config.with_exposure(config.t * c), d, &achieved, rho)?,
        None => f64::INFINITY,
    };
    let bound_met = required.is_some();
    let certificate = DesignCertificate {
        method: DesignMethod::FlatProduct2d,
        n,
        dims: 2,
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
        notes: vec![format!(
            "product of residue masks p = {}, e = {}, zero {}; penalty measured, not a priori",
            family.p, family.e, family.include_zero
        )],
        pass: thresholds_met,
    };
    Ok(Design2d { aperture, certificate, allocation: None })
}

fn flatness_spread_all(values: &[f64]) -> f64 {
    // flatness_spread skips index 0, so prepend a dummy
    let mut v = Vec::with_capacity(values.len() + 1);
    v.push(0.0);
    v.extend_from_slice(values);
    flatness_spread(&v)
}

/// Spreads per-frequency powers `P_{u,v}` over the product basis: function
/// `j·n + k` gets the mean of `P` over the frequencies it touches, so the
/// weights of each group of (up to four) functions add up to the group's `P`.
pub fn product_weights(n: usize, targets: &[f64]) -> Result<Vec<f64>> {
    if targets.len() != n * n {
        return Err(Error::invalid("target grid does not match n"));
    }
    let basis = ProductBasis::new(n)?;
    let groups: Vec<Vec<usize>> = (0..n).map(|j| basis.frequencies(j)).collect();
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            let (fj, fk) = (&groups[j], &groups[k]);
            let sum: f64 = fj.iter().flat_map(|&u| fk.iter().map(move |&v| targets[u * n + v])).sum();
            out[j * n + k] = sum / (fj.len() * fk.len()) as f64;
        }
    }
    Ok(out)
}

/// Coefficient-problem design on the grid. The product basis is tried first;
/// its weights only control pair sums `|â(u,v)|² + |â(u,-v)|²`, so when no
/// attempt meets the per-frequency thresholds the plane-wave basis is used,
/// with the same `M_2D(n)` and thresholds.
pub fn nazarov_2d(
    config: &ImagingConfig,
    d: &[f64],
    opts: &DesignOptions,
    cap: usize,
) -> Result<Design2d> {
    let n = check_grid(config, d, cap)?;
    if n == 1 {
        return single_pixel(config, d);
    }
    let plan = plan(config, d)?;
    let power = |v: &[f64]| Ok(dft2(v, n)?.power());
    let wrap = |v: Vec<f64>| Aperture::mask_2d(v, n);
    let uniform = || (0..n * n).map(|i| if i == 0 { 0.0 } else { 1.0 }).collect::<Vec<f64>>();

    let product = ProductBasis::new(n)?;
    let weights = match &plan.allocation {
        Some(a) => product_weights(n, &a.targets)?,
        None => uniform(),
    };
    let target = SpectrumTarget::normalized(weights)?;
    let geo = Geometry {
        basis: &product,
        m: m_bound_2d(n),
        method: DesignMethod::Nazarov2d,
        dims: 2,
        side: n,
        power: &power,
        wrap: &wrap,
    };
    let first = DesignOptions { restarts: opts.restarts.min(PRODUCT_RESTARTS), ..*opts };
    let (mut attempt, note) = match attempt_loop(&geo, config, d, &plan, &target, &first) {
        Ok(a) => (a, "product basis".to_string()),
        Err(Error::CertificateFailed { reason, .. }) => {
            let waves = PlaneWaveBasis::new(n)?;
            let weights = match &plan.allocation {
                Some(a) => a.targets.clone(),
                None => uniform(),
            };
            let target = SpectrumTarget::normalized(weights)?;
            let geo = Geometry {
                basis: &waves,
                m: geo.m,
                method: geo.method,
                dims: 2,
                side: n,
                power: &power,
                wrap: &wrap,
            };
            let a = attempt_loop(&geo, config, d, &plan, &target, opts)?;
            (a, format!("plane-wave basis; product basis failed ({reason})"))
        }
        Err(e) => return Err(e),
    };
    attempt.certificate.required_penalty = certificate::required_penalty(
        config,
        d,
        &attempt.certificate.achieved,
        attempt.certificate.rho,
        plan.bound,
    )?;
    attempt.certificate.notes.push(note);
    Ok(Design2d { aperture: attempt.aperture, certificate: attempt.certificate, allocation: plan.allocation })
}

/// Solves the coefficient problem on the `n × n` product basis: a grid `b`
/// with `‖b‖_∞ ≤ M_2D(n)` and `|(b, ψ_j ⊗ ψ_k)|² ≥ p_{j,k}`.
pub fn solve_coefficient_problem_2d(n: usize, weights: Vec<f64>, seed: u64) -> Result<BoundedVector> {
    let basis = ProductBasis::new(n)?;
    if weights.len() != basis.count() {
        return Err(Error::invalid("weights must have n² entries"));
    }
    let target = SpectrumTarget::new(weights)?;
    let opts = DesignOptions::with_seed(seed);
    let mut last = None;
    for r in 0..=DEFAULT_RESTARTS {
        let g = greedy_on(&basis, &target, opts.attempt_seed(r), opts.max_sweeps)?;
        let b = bounded_on(&basis, &target, &g.cortege, m_bound_2d(n))?;
        if b.verified {
            return Ok(b);
        }
        last = Some(b.margin);
    }
    Err(Error::CertificateFailed {
        restarts: DEFAULT_RESTARTS,
        reason: format!("coefficient margin {:?} < 1", last),
    })
}
