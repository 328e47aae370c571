//! Truncated Fock-space density matrices and von Neumann entropy.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::gaussian_engine::{cutoff_for_photons, log_factorials, DEFAULT_CUTOFF_CAP, PHYSICALITY_TOL};

/// Largest trace deficit accepted for a truncated state.
pub const MAX_TRACE_DEFICIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    /// Per-mode dimension (cutoff + 1); the matrix is their product.
    dims: Vec<usize>,
    mat: DMatrix<Complex64>,
    trace_deficit: f64,
}

impl FockDensityMatrix {
    /// Wraps a Hermitian matrix; the trace deficit is `1 - Re Tr`.
    pub fn from_matrix(dims: Vec<usize>, mat: DMatrix<Complex64>) -> Result<Self> {
        let size: usize = dims.iter().product();
        if mat.nrows() != size || mat.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: mat.nrows(),
            });
        }
        let herm = hermitian_defect(&mat);
        if herm > 1e-10 * mat.camax().max(1.0) {
            return Err(Error::Numerical(format!("matrix is not Hermitian (defect {herm:.3e})")));
        }
        let mat = (&mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
        let trace_deficit = (1.0 - mat.trace().re).max(0.0);
        Ok(Self {
            dims,
            mat,
            trace_deficit,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace_deficit(&self) -> f64 {
        self.trace_deficit
    }

    /// `½ ‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let diff = &self.mat - &other.mat;
        Ok(0.5 * diff.symmetric_eigenvalues().iter().map(|l| l.abs()).sum::<f64>())
    }
}

fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `e^{-|α|²/2} αⁿ / √n!` for `n = 0..=cutoff`.
pub fn coherent_vector(alpha: Complex64, cutoff: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(cutoff + 1);
    v[0] = Complex64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..=cutoff {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

/// `Σ w_i |α_i⟩⟨α_i|` on a single mode.
///
/// With `cutoff = None` the cutoff follows the Poisson-tail rule on
/// `max |α_i|²` and is raised once by half if the deficit is too large.
pub fn mixture_of_coherent(
    amplitudes: &[Complex64],
    weights: &[f64],
    cutoff: Option<usize>,
) -> Result<FockDensityMatrix> {
    if amplitudes.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: amplitudes.len(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return domain("mixture weights must be nonnegative");
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + 1e-12 {
        return domain(format!("mixture weights sum to {total} > 1"));
    }
    let build = |c: usize| {
        let mut mat = DMatrix::<Complex64>::zeros(c + 1, c + 1);
        for (a, w) in amplitudes.iter().zip(weights) {
            if *w == 0.0 {
                continue;
            }
            let v = coherent_vector(*a, c);
            mat += &v * v.adjoint() * Complex64::new(*w, 0.0);
        }
        let trace = mat.trace().re;
        let deficit = (total - trace).max(0.0);
        (mat, deficit)
    };
    let accept = |c: usize, mat: DMatrix<Complex64>, deficit: f64| -> Result<FockDensityMatrix> {
        let mut rho = FockDensityMatrix::from_matrix(vec![c + 1], mat)?;
        rho.trace_deficit = deficit;
        Ok(rho)
    };
    match cutoff {
        Some(c) => {
            let (mat, deficit) = build(c);
            if deficit > MAX_TRACE_DEFICIT {
                return Err(Error::Cutoff {
                    cutoff: c,
                    deficit,
                    suggested: c + c / 2 + 1,
                });
            }
            accept(c, mat, deficit)
        }
        None => mixture_of_coherent_capped(amplitudes, weights, DEFAULT_CUTOFF_CAP),
    }
}

/// Automatic-cutoff mixture whose cutoff, including the retry, never
/// exceeds `cap`.
pub fn mixture_of_coherent_capped(amplitudes: &[Complex64], weights: &[f64], cap: usize) -> Result<FockDensityMatrix> {
    let max_n = amplitudes.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    let first = cutoff_for_photons(max_n, cap);
    let rho = mixture_of_coherent(amplitudes, weights, Some(first));
    let second = (first + first / 2).min(cap);
    match rho {
        Err(Error::Cutoff { .. }) if second > first => mixture_of_coherent(amplitudes, weights, Some(second)),
        other => other,
    }
}

/// `-Σ λ log2 λ` over a spectrum, with clamping of tiny negative values.
pub fn entropy_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &l in eigenvalues {
        if l < -PHYSICALITY_TOL {
            return Err(Error::Physicality(l));
        }
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Von Neumann entropy of a Hermitian matrix, in bits.
pub fn hermitian_entropy(mat: DMatrix<Complex64>) -> Result<f64> {
    let eig = mat.symmetric_eigenvalues();
    entropy_from_eigenvalues(eig.as_slice())
}

pub fn von_neumann_entropy(rho: &FockDensityMatrix) -> Result<f64> {
    hermitian_entropy(rho.mat.clone())
}

/// `g(x) = (x+1) log2(x+1) - x log2 x`, the entropy of a thermal state with
/// `x` mean photons.
pub fn thermal_entropy(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).log2() - x * x.log2()
    }
}

/// `⟨k|D(γ)|l⟩` for number states `k`, `l`.
pub fn displaced_number_element(k: usize, l: usize, gamma: Complex64) -> Complex64 {
    let x = gamma.norm_sqr();
    let (lo, hi) = if k >= l { (l, k) } else { (k, l) };
    let alpha = (hi - lo) as f64;
    let lag = laguerre(lo, alpha, x);
    let lf = log_factorials(hi);
    let norm = (0.5 * (lf[lo] - lf[hi]) - x / 2.0).exp();
    let base = if k >= l { gamma } else { -gamma.conj() };
    base.powu((hi - lo) as u32) * (norm * lag)
}

/// Generalized Laguerre polynomial `L_n^{(α)}(x)` by three-term recurrence.
fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - x) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}
