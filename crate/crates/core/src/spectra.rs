//! Real-DFT utilities, the orthonormal trigonometric basis and the constants
//! `β(n)` and `M(n)` that control the coefficient-problem solver.
//!
//! Inner products are taken against the uniform probability measure on
//! `{0, .., n-1}`, i.e. `(x, y) = (1/n) Σ x_i y_i`, and `|x|_1 = (1/n) Σ |x_i|`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Unnormalized DFT `â_j = Σ_i a_i exp(-2πi·j·i/n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `|â_j|²` for every j.
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Forward DFT of a real vector. Uses a mixed-radix/Bluestein FFT, valid for
/// every length including primes; agrees with [`dft_direct`] to rounding.
pub fn dft(a: &[f64]) -> Result<Spectrum> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut buf: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(a.len());
    fft.process(&mut buf);
    Ok(Spectrum { values: buf })
}

/// Reference O(n²) DFT by direct summation over a twiddle table.
pub fn dft_direct(a: &[f64]) -> Result<Spectrum> {
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = a.len();
    let table = TrigTable::new(n);
    let values = (0..n)
        .map(|j| {
            let mut re = 0.0;
            let mut im = 0.0;
            let mut k = 0usize;
            for &x in a {
                re += x * table.cos[k];
                im -= x * table.sin[k];
                k += j;
                if k >= n {
                    k -= n;
                }
            }
            Complex64::new(re, im)
        })
        .collect();
    Ok(Spectrum { values })
}

/// Power spectrum `|â_j|²` of a real vector.
pub fn power_spectrum(a: &[f64]) -> Result<Vec<f64>> {
    Ok(dft(a)?.power())
}

/// 2D DFT of a row-major `n × n` grid.
pub fn dft2(a: &[f64], n: usize) -> Result<Spectrum> {
    if n == 0 || a.is_empty() {
        return Err(Error::EmptyInput);
    }
    if a.len() != n * n {
        return Err(Error::invalid(format!(
            "2D input has {} values, expected {}",
            a.len(),
            n * n
        )));
    }
    let mut buf: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    for row in buf.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = buf[r * n + c];
        }
        fft.process(&mut col);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
    Ok(Spectrum { values: buf })
}

/// `cos(2πk/n)` and `sin(2πk/n)` for `k = 0..n`.
#[derive(Debug, Clone)]
pub(crate) struct TrigTable {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigTable {
    pub fn new(n: usize) -> Self {
        let step = 2.0 * PI / n as f64;
        let (cos, sin) = (0..n)
            .map(|k| {
                let x = step * k as f64;
                (x.cos(), x.sin())
            })
            .unzip();
        Self { cos, sin }
    }
}

/// The real orthonormal DFT basis `ψ_0, .., ψ_{n-1}` for length `n`.
///
/// `ψ_0 = 1`; `ψ_j = √2 cos(ωji)` for `0 < j < h`; `ψ_j = √2 sin(ωji)` for
/// `h < j < n`; `ψ_h = cos(ωhi)` for even `n` and `√2 cos(ωhi)` for odd `n`,
/// where `h = ⌈(n-1)/2⌉` and `ω = 2π/n`.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    pub n: usize,
    pub h: usize,
    pub omega: f64,
    table: TrigTable,
}

/// Which trigonometric function a basis index carries, and its scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum BasisKind {
    Constant,
    Cos(f64),
    Sin(f64),
}

impl BasisSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        Ok(Self {
            n,
            h: n / 2, // == ceil((n-1)/2)
            omega: 2.0 * PI / n as f64,
            table: TrigTable::new(n),
        })
    }

    pub(crate) fn kind(&self, j: usize) -> BasisKind {
        if j == 0 {
            BasisKind::Constant
        } else if j < self.h {
            BasisKind::Cos(SQRT_2)
        } else if j == self.h {
            BasisKind::Cos(if self.n % 2 == 0 { 1.0 } else { SQRT_2 })
        } else {
            BasisKind::Sin(SQRT_2)
        }
    }

    /// Writes `ψ_j` into `out` (length `n`). `j` must be in range.
    pub(crate) fn write(&self, j: usize, out: &mut [f64]) {
        let n = self.n;
        let (table, scale) = match self.kind(j) {
            BasisKind::Constant => {
                out.fill(1.0);
                return;
            }
            BasisKind::Cos(s) => (&self.table.cos, s),
            BasisKind::Sin(s) => (&self.table.sin, s),
        };
        let mut k = 0usize;
        for v in out.iter_mut() {
            *v = scale * table[k];
            k += j;
            if k >= n {
                k -= n;
            }
        }
    }

    pub fn basis_vector(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.n {
            return Err(Error::IndexOutOfRange { index: j, len: self.n });
        }
        let mut out = vec![0.0; self.n];
        self.write(j, &mut out);
        Ok(out)
    }

    /// `(x, y) = (1/n) Σ x_i y_i`.
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        inner(x, y)
    }

    /// All coefficients `(a, ψ_j)`, computed in O(n log n) from the DFT.
    pub fn coefficients(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.n {
            return Err(Error::invalid("coefficient input length mismatch"));
        }
        let spec = dft(a)?;
        let n = self.n as f64;
        Ok((0..self.n)
            .map(|j| match self.kind(j) {
                BasisKind::Constant => spec.values[0].re / n,
                BasisKind::Cos(s) => s * spec.values[j].re / n,
                // â_j = Σ a (cos - i sin), so Σ a sin = -Im â_j
                BasisKind::Sin(s) => -s * spec.values[j].im / n,
            })
            .collect())
    }
}

/// Free-function form of [`BasisSpec::basis_vector`].
pub fn basis_vector(spec: &BasisSpec, j: usize) -> Result<Vec<f64>> {
    spec.basis_vector(j)
}

pub(crate) fn inner(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / x.len() as f64
}

pub(crate) fn l1_mean(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64
}

/// `β(n) = min_j |ψ_j|_1`.
///
/// `|ψ_j|_1` only depends on `q = n / gcd(j, n)` and on the cos/sin type, so
/// the minimum runs over divisors of `n` instead of all `n` indices.
pub fn beta(n: usize) -> f64 {
    assert!(n >= 1, "beta requires n >= 1");
    // ψ_0, and ψ_h for even n, both have every entry of modulus 1.
    let mut best = 1.0f64;
    let mut g = 1;
    while g * g <= n {
        if n % g == 0 {
            for q in [n / g, g] {
                if q >= 3 {
                    best = best.min(reduced_l1(q));
                }
            }
        }
        g += 1;
    }
    best
}

fn reduced_l1(q: usize) -> f64 {
    let table = TrigTable::new(q);
    let c: f64 = table.cos.iter().map(|v| v.abs()).sum();
    let s: f64 = table.sin.iter().map(|v| v.abs()).sum();
    SQRT_2 * c.min(s) / q as f64
}

/// `β(n)` by evaluating every basis vector. O(n²); reference for [`beta`].
pub fn beta_direct(n: usize) -> f64 {
    let spec = BasisSpec::new(n).expect("n >= 1");
    let mut buf = vec![0.0; n];
    (0..n)
        .map(|j| {
            spec.write(j, &mut buf);
            l1_mean(&buf)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `M(n) = (3π/2) β(n)^-2`, the sup-norm constant of the 1D coefficient problem.
pub fn m_bound(n: usize) -> f64 {
    1.5 * PI / beta(n).powi(2)
}

/// 2D analogue on the product basis `ψ_j ⊗ ψ_k`, whose l1 norms are bounded
/// below by `β(n)²`: `M₂(n) = (3π/2) β(n)^-4`.
pub fn m_bound_2d(n: usize) -> f64 {
    1.5 * PI / beta(n).powi(4)
}

/// Exposure penalty `2M²` in decibels.
pub fn penalty_db(m: f64) -> f64 {
    10.0 * (2.0 * m * m).log10()
}
