//! Greedy local search for a sign cortège.
//!
//! Given weights `p_j`, the potential of a cortège `ε` is the l1 norm of
//! `g = Σ ε_j √p_j ψ_j`. Starting from a random cortège, signs are flipped one
//! at a time, in index order, whenever that strictly increases the potential,
//! until a full sweep makes no flip.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::basis::RealBasis;
use super::{SignCortege, SpectrumTarget};
use crate::error::{Error, Result};

/// A flip must raise the potential by more than this.
pub const IMPROVEMENT_EPS: f64 = 1e-12;
/// Default sweep cap.
pub const DEFAULT_MAX_SWEEPS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyOutcome {
    pub cortege: SignCortege,
    pub potential: f64,
    pub sweeps: usize,
    pub flips: usize,
    /// A full sweep made no flip.
    pub converged: bool,
    /// Potential after every accepted flip, starting with the initial value.
    pub trace: Vec<f64>,
}

/// Signed combination `g = Σ ε_j √p_j ψ_j`.
pub(crate) fn combination<B: RealBasis>(
    basis: &B,
    target: &SpectrumTarget,
    cortege: &SignCortege,
) -> Vec<f64> {
    let mut g = vec![0.0; basis.len()];
    let mut psi = vec![0.0; basis.len()];
    for (&j, &s) in cortege.support.iter().zip(&cortege.signs) {
        let c = f64::from(s) * target.weights[j].sqrt();
        basis.write(j, &mut psi);
        for (gi, &v) in g.iter_mut().zip(&psi) {
            *gi += c * v;
        }
    }
    g
}

pub(crate) fn l1(g: &[f64]) -> f64 {
    g.iter().map(|v| v.abs()).sum::<f64>() / g.len() as f64
}

pub(crate) fn potential_on<B: RealBasis>(
    basis: &B,
    target: &SpectrumTarget,
    cortege: &SignCortege,
) -> Result<f64> {
    if target.weights.len() != basis.count() {
        return Err(Error::invalid("target size does not match basis"));
    }
    cortege.check_against(target)?;
    Ok(l1(&combination(basis, target, cortege)))
}

pub(crate) fn greedy_on<B: RealBasis>(
    basis: &B,
    target: &SpectrumTarget,
    seed: u64,
    max_sweeps: usize,
) -> Result<GreedyOutcome> {
    if max_sweeps == 0 {
        return Err(Error::invalid("max_sweeps must be at least 1"));
    }
    if target.weights.len() != basis.count() {
        return Err(Error::invalid("target size does not match basis"));
    }
    let support = target.support();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signs: Vec<i8> = support.iter().map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut cortege = SignCortege { support, signs };

    let mut g = combination(basis, target, &cortege);
    let mut current = l1(&g);
    let mut trace = vec![current];
    let mut psi = vec![0.0; basis.len()];
    let inv_len = 1.0 / basis.len() as f64;
    let mut sweeps = 0;
    let mut flips = 0;
    let mut converged = false;

    while sweeps < max_sweeps {
        sweeps += 1;
        let mut flipped = false;
        for idx in 0..cortege.support.len() {
            let j = cortege.support[idx];
            let step = 2.0 * f64::from(cortege.signs[idx]) * target.weights[j].sqrt();
            basis.write(j, &mut psi);
            let candidate =
                g.iter().zip(&psi).map(|(gi, v)| (gi - step * v).abs()).sum::<f64>() * inv_len;
            if candidate > current + IMPROVEMENT_EPS {
                for (gi, v) in g.iter_mut().zip(&psi) {
                    *gi -= step * v;
                }
                cortege.signs[idx] = -cortege.signs[idx];
                current = candidate;
                trace.push(current);
                flips += 1;
                flipped = true;
            }
        }
        if !flipped {
            converged = true;
            break;
        }
    }
    Ok(GreedyOutcome { cortege, potential: current, sweeps, flips, converged, trace })
}
