//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the crate.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `|â_j|²` by direct summation, reducing `jk mod n` before the trig call.
pub fn power_direct(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|j| {
            let (mut re, mut im) = (0.0, 0.0);
            for (k, &x) in a.iter().enumerate() {
                let th = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
                re += x * th.cos();
                im -= x * th.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// `|â_{u,v}|²` on a row-major `n × n` grid, by direct summation.
pub fn power_direct_2d(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for r in 0..n {
                for c in 0..n {
                    let th = 2.0 * PI * ((u * r + v * c) % n) as f64 / n as f64;
                    re += a[r * n + c] * th.cos();
                    im -= a[r * n + c] * th.sin();
                }
            }
            out[u * n + v] = re * re + im * im;
        }
    }
    out
}

/// Direct LMMSE: `Σ 1/(1/d_i + t|â_i|²/(N(W + Jρ)))`, zero terms for `d_i = 0`.
pub fn lmmse_direct(t: f64, w: f64, j: f64, d: &[f64], a: &[f64]) -> f64 {
    let power = if d.len() == a.len() { power_direct(a) } else { unreachable!() };
    lmmse_from(t, w, j, d, &power, a.iter().sum::<f64>() / a.len() as f64)
}

pub fn lmmse_from(t: f64, w: f64, j: f64, d: &[f64], power: &[f64], rho: f64) -> f64 {
    let n = d.len() as f64;
    d.iter()
        .zip(power)
        .map(|(&di, &p)| {
            if di == 0.0 {
                0.0
            } else {
                1.0 / (1.0 / di + t * p / (n * (w + j * rho)))
            }
        })
        .sum()
}

/// Exact minimum of `Σ 1/(1/d_i + γ x_i)` over `x ≥ 0`, `Σ x = P`, by trying
/// every active set and keeping the feasible KKT point with least objective.
/// Only for small `d`.
pub fn waterfill_kkt(d: &[f64], gamma: f64, total: f64) -> (f64, Vec<f64>) {
    let m = d.len();
    let objective = |x: &[f64]| -> f64 {
        d.iter()
            .zip(x)
            .map(|(&di, &xi)| if di == 0.0 { 0.0 } else { 1.0 / (1.0 / di + gamma * xi) })
            .sum()
    };
    let mut best = (objective(&vec![0.0; m]), vec![0.0; m]);
    if total <= 0.0 {
        return best;
    }
    best.0 = f64::INFINITY;
    for set in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|&i| set >> i & 1 == 1 && d[i] > 0.0).collect();
        if idx.len() as u32 != set.count_ones() {
            continue;
        }
        // On the active set 1/d_i + γx_i = L; the objective only depends on
        // that level, so solve Σ (L - 1/d_i)/γ = P for L.
        let inv: f64 = idx.iter().map(|&i| 1.0 / d[i]).sum();
        let level = (gamma * total + inv) / idx.len() as f64;
        let mut x = vec![0.0; m];
        let mut ok = true;
        for &i in &idx {
            x[i] = (level - 1.0 / d[i]) / gamma;
            if x[i] < -1e-12 {
                ok = false;
            }
        }
        if ok {
            let v = objective(&x);
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    best
}

/// `n(⌊nρ⌋ + frac²) − n²ρ²` by plain arithmetic.
pub fn exact_budget(n: usize, rho: f64) -> f64 {
    let x = n as f64 * rho;
    let fl = x.floor();
    let fr = x - fl;
    (n as f64 * (fl + fr * fr) - x * x).max(0.0)
}

/// Lower bound at one `ρ` by brute waterfilling through `waterfill_kkt`
/// (small `n` only).
pub fn lower_bound_kkt(t: f64, w: f64, j: f64, d: &[f64], rho: f64) -> f64 {
    let n = d.len();
    let gamma = t / (n as f64 * (w + j * rho));
    let dc = if d[0] == 0.0 { 0.0 } else { 1.0 / (1.0 / d[0] + gamma * (n as f64 * rho).powi(2)) };
    dc + waterfill_kkt(&d[1..], gamma, exact_budget(n, rho)).0
}

/// Primes up to `n` by trial division.
pub fn primes_trial(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

/// Nonzero e-th power residues mod p by raising every element to the e-th power.
pub fn residues_by_powers(p: u64, e: u32) -> Vec<u64> {
    let mut r: Vec<u64> = (1..p).map(|x| (0..e).fold(1u64, |acc, _| acc * x % p)).collect();
    r.sort_unstable();
    r.dedup();
    r
}

/// Smallest encoding among all shifts and reflections of a 0/1 vector.
pub fn bracelet_key(mask: &[u8]) -> Vec<u8> {
    let n = mask.len();
    let mut best: Option<Vec<u8>> = None;
    for s in 0..n {
        for refl in [false, true] {
            let v: Vec<u8> = (0..n)
                .map(|i| {
                    let k = if refl { (n - i) % n } else { i };
                    mask[(k + s) % n]
                })
                .collect();
            if best.as_ref().map_or(true, |b| v < *b) {
                best = Some(v);
            }
        }
    }
    best.unwrap()
}
