//! Exhaustive search over binary masks with a fixed number of ones, one
//! representative per class under cyclic shift and reflection.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{lmmse, Aperture, ImagingConfig};

/// Enumeration guard.
pub const MAX_BRUTEFORCE_N: usize = 24;
/// Classes within this relative distance of the minimum count as tied.
/// Decimations `i -> u·i mod n` permute `|â|`, so exact ties are common.
pub const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BruteForce {
    pub n: usize,
    pub ones: usize,
    /// Masks with exactly `ones` ones.
    pub masks: u64,
    /// Classes up to shift and reflection.
    pub classes: u64,
    /// Tied class with the smallest canonical encoding.
    pub best: Vec<u8>,
    pub best_lmmse: f64,
    /// Canonical representatives of every class attaining the minimum.
    pub ties: Vec<Vec<u8>>,
}

impl BruteForce {
    /// Whether `mask` is equivalent to one of the minimizers.
    pub fn is_minimizer(&self, mask: &[u8]) -> bool {
        self.ties.iter().any(|t| equivalent(t, mask))
    }
}

fn rotate(bits: u32, n: usize, s: usize) -> u32 {
    if s == 0 {
        return bits;
    }
    let mask = (1u32 << n) - 1;
    ((bits >> s) | (bits << (n - s))) & mask
}

fn reflect(bits: u32, n: usize) -> u32 {
    // i -> (n - i) mod n
    let mut out = bits & 1;
    for i in 1..n {
        if bits >> i & 1 == 1 {
            out |= 1 << (n - i);
        }
    }
    out
}

/// Smallest encoding among all shifts and reflections.
pub fn canonical(bits: u32, n: usize) -> u32 {
    let r = reflect(bits, n);
    (0..n).flat_map(|s| [rotate(bits, n, s), rotate(r, n, s)]).min().unwrap_or(bits)
}

pub fn to_bits(mask: &[u8]) -> u32 {
    mask.iter().enumerate().fold(0, |acc, (i, &b)| if b != 0 { acc | 1 << i } else { acc })
}

fn from_bits(bits: u32, n: usize) -> Vec<u8> {
    (0..n).map(|i| (bits >> i & 1) as u8).collect()
}

/// Whether two binary masks agree up to cyclic shift and reflection.
pub fn equivalent(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && canonical(to_bits(a), a.len()) == canonical(to_bits(b), b.len())
}

/// Minimizes the LMMSE over binary masks with `ones` ones and lists every
/// class attaining the minimum.
pub fn bruteforce_binary(config: &ImagingConfig, d: &[f64], ones: usize) -> Result<BruteForce> {
    let n = config.n;
    if n > MAX_BRUTEFORCE_N {
        return Err(Error::CapExceeded { n, cap: MAX_BRUTEFORCE_N });
    }
    if ones > n {
        return Err(Error::invalid("ones exceeds n"));
    }
    if d.len() != n {
        return Err(Error::invalid("prior length does not match n"));
    }
    let mut masks = 0u64;
    let mut classes = 0u64;
    let mut scored: Vec<(f64, u32)> = Vec::new();
    let mut bits: u32 = if ones == 0 { 0 } else { (1u32 << ones) - 1 };
    let limit = 1u64 << n;
    loop {
        masks += 1;
        if canonical(bits, n) == bits {
            classes += 1;
            let values = from_bits(bits, n).into_iter().map(f64::from).collect();
            let v = lmmse(config, d, &Aperture::mask(values)?)?;
            scored.push((v, bits));
        }
        if ones == 0 {
            break;
        }
        // next integer with the same popcount
        let c = bits & bits.wrapping_neg();
        let r = bits as u64 + c as u64;
        if r >= limit {
            break;
        }
        let r = r as u32;
        bits = (((r ^ bits) >> 2) / c) | r;
    }
    let min = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let mut tied: Vec<(f64, u32)> =
        scored.into_iter().filter(|s| s.0 <= min + TIE_RTOL * min.abs()).collect();
    tied.sort_by_key(|s| s.1);
    let (best_lmmse, bits) = tied[0];
    let ties = tied.iter().map(|s| from_bits(s.1, n)).collect();
    Ok(BruteForce { n, ones, masks, classes, best: from_bits(bits, n), best_lmmse, ties })
}

/// Continuous family: `a_0 = ε`, `a_i = 1 - ε/6` on the nonzero squares mod
/// `n`, zero elsewhere.
pub fn epsilon_family(n: usize, eps: f64) -> Result<Aperture> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid("epsilon must lie in [0, 1]"));
    }
    let mut values = vec![0.0; n];
    for i in 1..n {
        values[i * i % n] = 1.0 - eps / 6.0;
    }
    values[0] = eps;
    Aperture::mask(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        assert!(equivalent(&[1, 1, 0, 0], &[0, 1, 1, 0]));
        assert!(equivalent(&[1, 1, 0, 1, 0, 0], &[1, 0, 1, 1, 0, 0]));
        assert!(!equivalent(&[1, 1, 0, 0], &[1, 0, 1, 0]));
    }

    #[test]
    fn class_counts() {
        // necklaces/bracelets: 7 choose 3 gives 4 bracelets
        let c = ImagingConfig::new(7, 10.0, 1e-3, 1e-3).unwrap();
        let r = bruteforce_binary(&c, &[0.1; 7], 3).unwrap();
        assert_eq!(r.masks, 35);
        assert_eq!(r.classes, 4);
    }

    #[test]
    fn no_ones_gives_prior_total() {
        let c = ImagingConfig::new(5, 10.0, 1e-3, 1e-3).unwrap();
        let r = bruteforce_binary(&c, &[0.2; 5], 0).unwrap();
        assert_eq!((r.masks, r.classes), (1, 1));
        assert!((r.best_lmmse - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guard() {
        let c = ImagingConfig::new(25, 10.0, 1e-3, 1e-3).unwrap();
        assert!(bruteforce_binary(&c, &[0.1; 25], 3).is_err());
    }
}
