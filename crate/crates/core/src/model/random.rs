//! Random on-off baseline masks. All randomness is ChaCha8 seeded explicitly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{lmmse_from_power, Aperture, ImagingConfig};
use crate::error::{Error, Result};
use crate::spectra;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed for stream `(a, b)` of a base seed.
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    mix(mix(mix(base) ^ a) ^ b.rotate_left(32))
}

/// Each entry is 1 with probability `rho`, independently.
pub fn random_onoff(n: usize, rho: f64, seed: u64) -> Result<Aperture> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid("rho must lie in [0, 1]"));
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|_| if rng.gen::<f64>() < rho { 1.0 } else { 0.0 })
        .collect();
    Aperture::mask(values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomOnOff {
    pub rho: f64,
    pub mean_lmmse: f64,
}

/// Spectra of `trials` random masks at every grid density, drawn once so that
/// the same ensemble can be scored at many exposures.
#[derive(Debug, Clone)]
pub struct RandomEnsemble {
    pub rho_grid: Vec<f64>,
    /// `members[g]` holds `(|â|², ρ(a))` for each trial at `rho_grid[g]`.
    members: Vec<Vec<(Vec<f64>, f64)>>,
}

impl RandomEnsemble {
    pub fn draw(n: usize, rho_grid: &[f64], trials: usize, seed: u64) -> Result<Self> {
        if rho_grid.is_empty() {
            return Err(Error::invalid("rho grid is empty"));
        }
        if trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        let members = rho_grid
            .iter()
            .enumerate()
            .map(|(g, &rho)| {
                (0..trials)
                    .map(|k| {
                        let a = random_onoff(n, rho, derive_seed(seed, g as u64, k as u64))?;
                        Ok((spectra::power_spectrum(&a.values)?, a.rho()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rho_grid: rho_grid.to_vec(), members })
    }

    /// Mean LMMSE for each grid density.
    pub fn means(&self, config: &ImagingConfig, d: &[f64]) -> Result<Vec<f64>> {
        self.members
            .iter()
            .map(|trials| {
                let mut total = 0.0;
                for (power, rho) in trials {
                    total += lmmse_from_power(config, d, power, *rho)?;
                }
                Ok(total / trials.len() as f64)
            })
            .collect()
    }

    /// Density with the smallest mean LMMSE; ties keep the first.
    pub fn best(&self, config: &ImagingConfig, d: &[f64]) -> Result<RandomOnOff> {
        let means = self.means(config, d)?;
        let (g, &mean_lmmse) = means
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, &f64)>, (g, m)| match acc {
                Some((_, best)) if *best <= *m => acc,
                _ => Some((g, m)),
            })
            .expect("grid is nonempty");
        Ok(RandomOnOff { rho: self.rho_grid[g], mean_lmmse })
    }
}

/// Best random on-off density over `rho_grid`, averaging `trials` masks each.
pub fn best_random_onoff(
    config: &ImagingConfig,
    d: &[f64],
    rho_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<RandomOnOff> {
    RandomEnsemble::draw(config.n, rho_grid, trials, seed)?.best(config, d)
}
