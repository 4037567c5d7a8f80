use crate::error::Result;
use crate::spectra::{BasisKind, BasisSpec};

/// An orthonormal real basis over a finite sample set, with inner products
/// taken against the uniform probability measure.
pub trait RealBasis {
    /// Number of basis functions.
    fn count(&self) -> usize;
    /// Number of samples per function.
    fn len(&self) -> usize;
    /// Writes function `j` into `out`.
    fn write(&self, j: usize, out: &mut [f64]);
    /// `(x, φ_j)` for every `j`.
    fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Lower bound on `|φ_j|_1` over the family.
    fn l1_floor(&self) -> f64;
}

impl RealBasis for BasisSpec {
    fn count(&self) -> usize {
        self.n
    }

    fn len(&self) -> usize {
        self.n
    }

    fn write(&self, j: usize, out: &mut [f64]) {
        BasisSpec::write(self, j, out)
    }

    fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        BasisSpec::coefficients(self, x)
    }

    fn l1_floor(&self) -> f64 {
        crate::spectra::beta(self.n)
    }
}

/// Product basis `ψ_j ⊗ ψ_k` on an `n × n` grid; function `j·n + k` takes the
/// value `ψ_j(r) ψ_k(c)` at row-major position `r·n + c`.
#[derive(Debug, Clone)]
pub struct ProductBasis {
    spec: BasisSpec,
    rows: Vec<Vec<f64>>,
}

impl ProductBasis {
    pub fn new(n: usize) -> Result<Self> {
        let spec = BasisSpec::new(n)?;
        let rows = (0..n).map(|j| spec.basis_vector(j)).collect::<Result<_>>()?;
        Ok(Self { spec, rows })
    }

    pub fn side(&self) -> usize {
        self.spec.n
    }

    /// 1D frequencies touched by `ψ_j`: `{0}`, `{h}` for even `n`, else `{j', n-j'}`.
    pub(crate) fn frequencies(&self, j: usize) -> Vec<usize> {
        let n = self.spec.n;
        match self.spec.kind(j) {
            BasisKind::Constant => vec![0],
            BasisKind::Cos(_) if 2 * j == n => vec![j],
            BasisKind::Cos(_) => vec![j, n - j],
            BasisKind::Sin(_) => vec![n - j, j],
        }
    }
}

impl RealBasis for ProductBasis {
    fn count(&self) -> usize {
        self.spec.n * self.spec.n
    }

    fn len(&self) -> usize {
        self.spec.n * self.spec.n
    }

    fn write(&self, j: usize, out: &mut [f64]) {
        let n = self.spec.n;
        let (r, c) = (&self.rows[j / n], &self.rows[j % n]);
        for (chunk, &rv) in out.chunks_mut(n).zip(r) {
            for (o, &cv) in chunk.iter_mut().zip(c) {
                *o = rv * cv;
            }
        }
    }

    fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.spec.n;
        // transform rows, then columns
        let mut stage = vec![0.0; n * n];
        for (r, row) in x.chunks(n).enumerate() {
            for (k, v) in self.spec.coefficients(row)?.into_iter().enumerate() {
                stage[r * n + k] = v;
            }
        }
        let mut out = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for k in 0..n {
            for r in 0..n {
                col[r] = stage[r * n + k];
            }
            for (j, v) in self.spec.coefficients(&col)?.into_iter().enumerate() {
                out[j * n + k] = v;
            }
        }
        Ok(out)
    }

    fn l1_floor(&self) -> f64 {
        crate::spectra::beta(self.spec.n).powi(2)
    }
}

/// Real plane waves on an `n × n` grid. Function `u·n + v` is tied to the
/// frequency `(u, v)`: `√2 cos` for the smaller index of a conjugate pair
/// `{(u, v), (-u, -v)}`, `√2 sin` for the larger, and `cos` (`±1`) for
/// self-conjugate frequencies. Each function touches a single pair, so
/// `|(b, φ)|²` controls `|b̂(u, v)|²` directly.
#[derive(Debug, Clone)]
pub struct PlaneWaveBasis {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Wave {
    Constant,
    Cos(f64),
    Sin(f64),
}

impl PlaneWaveBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(crate::error::Error::EmptyInput);
        }
        let w = 2.0 * std::f64::consts::PI / n as f64;
        let cos = (0..n).map(|m| (w * m as f64).cos()).collect();
        let sin = (0..n).map(|m| (w * m as f64).sin()).collect();
        Ok(Self { n, cos, sin })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    fn partner(&self, idx: usize) -> usize {
        let n = self.n;
        let (u, v) = (idx / n, idx % n);
        ((n - u) % n) * n + (n - v) % n
    }

    fn wave(&self, idx: usize) -> Wave {
        let p = self.partner(idx);
        if idx == 0 {
            Wave::Constant
        } else if p == idx {
            Wave::Cos(1.0)
        } else if idx < p {
            Wave::Cos(std::f64::consts::SQRT_2)
        } else {
            Wave::Sin(std::f64::consts::SQRT_2)
        }
    }
}

impl RealBasis for PlaneWaveBasis {
    fn count(&self) -> usize {
        self.n * self.n
    }

    fn len(&self) -> usize {
        self.n * self.n
    }

    fn write(&self, j: usize, out: &mut [f64]) {
        let n = self.n;
        let (u, v) = (j / n, j % n);
        let wave = self.wave(j);
        for r in 0..n {
            for c in 0..n {
                let m = (u * r + v * c) % n;
                out[r * n + c] = match wave {
                    Wave::Constant => 1.0,
                    Wave::Cos(s) => s * self.cos[m],
                    Wave::Sin(s) => s * self.sin[m],
                };
            }
        }
    }

    fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let spec = crate::spectra::dft2(x, n)?;
        let scale = 1.0 / (n * n) as f64;
        Ok((0..n * n)
            .map(|j| {
                // X(u,v) = Σ x e^{-iθ}: Re X = Σ x cos θ, Im X = -Σ x sin θ
                let z = spec.values[j];
                match self.wave(j) {
                    Wave::Constant => z.re * scale,
                    Wave::Cos(s) => s * z.re * scale,
                    Wave::Sin(s) => -s * z.im * scale,
                }
            })
            .collect())
    }

    fn l1_floor(&self) -> f64 {
        crate::spectra::beta(self.n)
    }
}
