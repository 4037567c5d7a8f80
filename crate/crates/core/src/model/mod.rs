//! Measurement model: scene priors, imaging configuration, apertures and the
//! LMMSE of a circulant mask camera,
//!
//! ```text
//! m(n, t, W, J, d, a) = Σ_i 1 / (1/d_i + t |â_i|² / (n (W + J ρ(a))))
//! ```

mod prior;
mod random;

pub use prior::{sample_prior, PriorKind, ScenePrior, DEFAULT_KNEE};
pub use random::{best_random_onoff, derive_seed, random_onoff, RandomEnsemble, RandomOnOff};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra;

/// Scene length `n`, exposure `t`, thermal noise `W` and shot noise `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagingConfig {
    pub n: usize,
    pub t: f64,
    pub w: f64,
    pub j: f64,
    /// Treat `W = J = 0` with `t > 0` as the noiseless limit instead of an error.
    #[serde(default)]
    pub allow_noiseless: bool,
}

impl ImagingConfig {
    pub fn new(n: usize, t: f64, w: f64, j: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        for (name, v) in [("t", t), ("W", w), ("J", j)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and nonnegative")));
            }
        }
        Ok(Self { n, t, w, j, allow_noiseless: false })
    }

    pub fn with_exposure(&self, t: f64) -> Self {
        Self { t, ..*self }
    }

    /// Noise power `W + Jρ`.
    pub fn noise(&self, rho: f64) -> f64 {
        self.w + self.j * rho
    }

    /// `γ(ρ) = t / (n (W + Jρ))` for a scene of `n` samples.
    pub fn gamma(&self, rho: f64) -> f64 {
        gamma_for(self.n, self.t, self.noise(rho))
    }

    /// `W / J`, infinite when there is no shot noise.
    pub fn noise_ratio(&self) -> f64 {
        if self.j == 0.0 {
            f64::INFINITY
        } else {
            self.w / self.j
        }
    }
}

pub(crate) fn gamma_for(pixels: usize, t: f64, noise: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t / (pixels as f64 * noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dims {
    One,
    /// Square grid with the given side, stored row-major.
    Two(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ApertureKind {
    Mask,
    /// `a = (n, 0, .., 0)`: the ideal lens, `â_j = n`. Not a physical mask.
    Lens,
}

/// A mask vector `a ∈ [0,1]^n` or `[0,1]^{n×n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    pub values: Vec<f64>,
    pub dims: Dims,
    pub kind: ApertureKind,
}

impl Aperture {
    pub fn mask(values: Vec<f64>) -> Result<Self> {
        check_mask(&values)?;
        Ok(Self { values, dims: Dims::One, kind: ApertureKind::Mask })
    }

    pub fn mask_2d(values: Vec<f64>, n: usize) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "2D mask has {} values, expected {}",
                values.len(),
                n * n
            )));
        }
        check_mask(&values)?;
        Ok(Self { values, dims: Dims::Two(n), kind: ApertureKind::Mask })
    }

    pub fn lens(n: usize) -> Self {
        let mut values = vec![0.0; n];
        if n > 0 {
            values[0] = n as f64;
        }
        Self { values, dims: Dims::One, kind: ApertureKind::Lens }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![0.0; n], dims: Dims::One, kind: ApertureKind::Mask }
    }

    /// Side length `n` (the number of entries for 1D).
    pub fn side(&self) -> usize {
        match self.dims {
            Dims::One => self.values.len(),
            Dims::Two(n) => n,
        }
    }

    /// Transmissivity `ρ(a)`, the mean entry. The lens transmits everything.
    pub fn rho(&self) -> f64 {
        match self.kind {
            ApertureKind::Lens => 1.0,
            ApertureKind::Mask => self.values.iter().sum::<f64>() / self.values.len() as f64,
        }
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn ones(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1.0).count()
    }

    /// `|â_j|²`, over the 2D DFT for grids.
    pub fn power_spectrum(&self) -> Result<Vec<f64>> {
        match self.dims {
            Dims::One => spectra::power_spectrum(&self.values),
            Dims::Two(n) => Ok(spectra::dft2(&self.values, n)?.power()),
        }
    }
}

fn check_mask(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::invalid(format!("mask entry {v} outside [0, 1]")));
    }
    Ok(())
}

/// LMMSE of estimating the scene through aperture `a`.
pub fn lmmse(config: &ImagingConfig, d: &[f64], a: &Aperture) -> Result<f64> {
    if d.len() != a.values.len() {
        return Err(Error::invalid(format!(
            "prior has {} samples but aperture has {} entries",
            d.len(),
            a.values.len()
        )));
    }
    if a.side() != config.n {
        return Err(Error::invalid(format!(
            "aperture side {} does not match n = {}",
            a.side(),
            config.n
        )));
    }
    let power = a.power_spectrum()?;
    lmmse_from_power(config, d, &power, a.rho())
}

/// LMMSE from a precomputed power spectrum `|â_i|²` and transmissivity.
/// The number of pixels is `d.len()` (so `n²` for grids).
///
/// Terms with `d_i = 0` contribute nothing.
pub fn lmmse_from_power(config: &ImagingConfig, d: &[f64], power: &[f64], rho: f64) -> Result<f64> {
    debug_assert_eq!(d.len(), power.len());
    let prior_total: f64 = d.iter().sum();
    if config.t == 0.0 || power.iter().all(|&p| p == 0.0) {
        return Ok(prior_total);
    }
    let noise = config.noise(rho);
    if noise <= 0.0 {
        if !config.allow_noiseless {
            return Err(Error::Noiseless);
        }
        return Ok(d.iter().zip(power).filter(|(_, &p)| p == 0.0).map(|(d, _)| d).sum());
    }
    let gain = gamma_for(d.len(), config.t, noise);
    Ok(d.iter().zip(power).map(|(&di, &pi)| mmse_term(di, gain * pi)).sum())
}

/// `1 / (1/d + x)`, zero when `d = 0`.
#[inline]
pub(crate) fn mmse_term(d: f64, x: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d / (1.0 + d * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(t: f64) -> ImagingConfig {
        ImagingConfig::new(13, t, 1e-3, 1e-3).unwrap()
    }

    #[test]
    fn zero_exposure_returns_prior_mass() {
        let d = ScenePrior::iid(0.01).unwrap().sample(13).unwrap();
        let a = Aperture::mask(vec![1.0; 13]).unwrap();
        assert_relative_eq!(lmmse(&cfg(0.0), &d, &a).unwrap(), 0.01, max_relative = 1e-12);
    }

    #[test]
    fn zero_mask_returns_prior_mass() {
        let d = ScenePrior::bandlimited(2.0, 0.2, 0.1).unwrap().sample(13).unwrap();
        let total: f64 = d.iter().sum();
        let v = lmmse(&cfg(1e4), &d, &Aperture::zeros(13)).unwrap();
        assert_relative_eq!(v, total, max_relative = 1e-12);
        // also with no noise at all: ρ = 0 means nothing was measured
        let quiet = ImagingConfig::new(13, 5.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(lmmse(&quiet, &d, &Aperture::zeros(13)).unwrap(), total);
    }

    #[test]
    fn noiseless_requires_opt_in() {
        let d = vec![0.1; 4];
        let a = Aperture::mask(vec![1.0, 0.0, 1.0, 1.0]).unwrap();
        let mut c = ImagingConfig::new(4, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(lmmse(&c, &d, &a), Err(Error::Noiseless)));
        c.allow_noiseless = true;
        assert!(lmmse(&c, &d, &a).unwrap() < 1e-12);
    }

    #[test]
    fn mask_bounds_are_enforced() {
        assert!(Aperture::mask(vec![0.5, 1.2]).is_err());
        assert!(Aperture::mask(vec![]).is_err());
        assert!(Aperture::mask_2d(vec![0.5; 5], 2).is_err());
        let lens = Aperture::lens(5);
        assert_eq!(lens.kind, ApertureKind::Lens);
        assert_eq!(lens.rho(), 1.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = Aperture::mask(vec![1.0; 5]).unwrap();
        assert!(lmmse(&ImagingConfig::new(5, 1.0, 1.0, 1.0).unwrap(), &[0.1; 4], &a).is_err());
        assert!(lmmse(&ImagingConfig::new(6, 1.0, 1.0, 1.0).unwrap(), &[0.1; 5], &a).is_err());
    }
}
