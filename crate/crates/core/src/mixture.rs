//! Entropy of finite mixtures of displaced thermal states through their Gram
//! matrix.
//!
//! A mixture `ρ = Σ_i w_i D(a_i) τ D(a_i)†` with a common product-thermal
//! `τ = ⊗ τ(n_m)` expands as `Σ_{i,k} w_i t_k |ψ_ik⟩⟨ψ_ik|` with
//! `|ψ_ik⟩ = D(a_i)|k⟩`. Its nonzero spectrum equals that of
//! `G = W^{1/2} O W^{1/2}` where `O` holds the overlaps `⟨ψ_ik|ψ_jl⟩`, so the
//! entropy needs no Fock truncation of the displacements themselves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock_space::{displaced_number_element, entropy_from_eigenvalues};
use crate::gaussian_engine::williamson;

/// Default bound on the discarded thermal tail per mode.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Components lighter than this fraction of the heaviest are dropped.
const WEIGHT_FLOOR_REL: f64 = 1e-16;

#[derive(Debug, Clone)]
pub struct MixtureGram {
    n_components: usize,
    /// Thermal level tuples kept, with their product populations.
    populations: Vec<f64>,
    overlap: DMatrix<Complex64>,
}

impl MixtureGram {
    /// `amplitudes[i][m]` is the displacement of component `i` on mode `m`;
    /// `occupations[m]` the common thermal occupation of mode `m`.
    pub fn new(amplitudes: &[Vec<Complex64>], occupations: &[f64], tail_tol: f64) -> Result<Self> {
        if amplitudes.is_empty() {
            return domain("mixture needs at least one component");
        }
        let n_modes = occupations.len();
        if amplitudes.iter().any(|a| a.len() != n_modes) {
            return Err(Error::DimensionMismatch {
                expected: n_modes,
                got: amplitudes.iter().map(|a| a.len()).find(|l| *l != n_modes).unwrap_or(0),
            });
        }
        if occupations.iter().any(|n| !(*n >= 0.0) || !n.is_finite()) {
            return domain("thermal occupations must be finite and nonnegative");
        }
        let per_mode: Vec<Vec<f64>> = occupations.iter().map(|n| thermal_levels(*n, tail_tol)).collect();
        let mut tuples: Vec<(Vec<usize>, f64)> = vec![(Vec::new(), 1.0)];
        for levels in &per_mode {
            let mut next = Vec::with_capacity(tuples.len() * levels.len());
            for (t, p) in &tuples {
                for (k, pk) in levels.iter().enumerate() {
                    let mut t2 = t.clone();
                    t2.push(k);
                    next.push((t2, p * pk));
                }
            }
            tuples = next;
        }
        tuples.retain(|(_, p)| *p >= tail_tol * 1e-3);

        let nt = tuples.len();
        let n = amplitudes.len() * nt;
        let mut overlap = DMatrix::<Complex64>::zeros(n, n);
        for (i, ai) in amplitudes.iter().enumerate() {
            for (j, aj) in amplitudes.iter().enumerate().skip(i) {
                let phase: f64 = ai.iter().zip(aj).map(|(x, y)| (x.conj() * y).im).sum();
                let diff: Vec<Complex64> = ai.iter().zip(aj).map(|(x, y)| y - x).collect();
                let ph = Complex64::from_polar(1.0, phase);
                for (ti, (k, _)) in tuples.iter().enumerate() {
                    for (tj, (l, _)) in tuples.iter().enumerate() {
                        let mut v = ph;
                        for m in 0..n_modes {
                            v *= displaced_number_element(k[m], l[m], diff[m]);
                        }
                        let (r, c) = (i * nt + ti, j * nt + tj);
                        overlap[(r, c)] = v;
                        overlap[(c, r)] = v.conj();
                    }
                }
            }
        }
        Ok(Self {
            n_components: amplitudes.len(),
            populations: tuples.into_iter().map(|(_, p)| p).collect(),
            overlap,
        })
    }

    /// Mixture of Gaussian states sharing covariance `cm`, one per first
    /// moment vector.
    pub fn gaussian(cm: &DMatrix<f64>, fms: &[DVector<f64>], tail_tol: f64) -> Result<Self> {
        let w = williamson(cm)?;
        let amps: Vec<Vec<Complex64>> = fms.iter().map(|fm| w.normal_amplitudes(fm)).collect();
        Self::new(&amps, &w.occupations(), tail_tol)
    }

    pub fn n_components(&self) -> usize {
        self.n_components
    }

    /// Thermal level tuples kept per component.
    pub fn levels(&self) -> usize {
        self.populations.len()
    }

    /// Entropy in bits of the mixture with the given component weights
    /// (normalized internally).
    pub fn entropy(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.n_components {
            return Err(Error::DimensionMismatch {
                expected: self.n_components,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return domain("mixture weights must be nonnegative");
        }
        let max_w = weights.iter().copied().fold(0.0, f64::max);
        if !(max_w > 0.0) {
            return domain("mixture weights are all zero");
        }
        let nt = self.populations.len();
        let keep: Vec<usize> = (0..self.n_components)
            .filter(|i| weights[*i] > WEIGHT_FLOOR_REL * max_w)
            .collect();
        let idx: Vec<(usize, f64)> = keep
            .iter()
            .flat_map(|i| (0..nt).map(move |t| (i * nt + t, weights[*i] * self.populations[t])))
            .collect();
        let total: f64 = idx.iter().map(|(_, w)| w).sum();
        let scale: Vec<f64> = idx.iter().map(|(_, w)| (w / total).sqrt()).collect();
        let g = DMatrix::from_fn(idx.len(), idx.len(), |r, c| {
            self.overlap[(idx[r].0, idx[c].0)] * (scale[r] * scale[c])
        });
        let eig = g.symmetric_eigenvalues();
        entropy_from_eigenvalues(eig.as_slice())
    }
}

/// Populations `nᵏ/(n+1)^{k+1}` up to the point where the remaining tail
/// `(n/(n+1))^K` drops below `tol`.
fn thermal_levels(n: f64, tol: f64) -> Vec<f64> {
    if n < 1e-15 {
        return vec![1.0];
    }
    let r = n / (n + 1.0);
    let mut out = Vec::new();
    let mut t = 1.0 / (n + 1.0);
    let mut tail = 1.0;
    while tail > tol && out.len() < 10_000 {
        out.push(t);
        tail *= r;
        t *= r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock_space::{mixture_of_coherent, thermal_entropy, von_neumann_entropy};
    use crate::gaussian_engine::{FockKernel, GaussianState};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn thermal_level_tail() {
        let l = thermal_levels(1.0, 1e-12);
        assert_eq!(l.len(), 40);
        assert!((1.0 - l.iter().sum::<f64>()) <= 1e-12);
        assert_eq!(thermal_levels(0.0, 1e-12), vec![1.0]);
    }

    #[test]
    fn single_thermal_component() {
        let g = MixtureGram::new(&[vec![c(0.4, 0.1)]], &[0.7], 1e-14).unwrap();
        assert_abs_diff_eq!(g.entropy(&[1.0]).unwrap(), thermal_entropy(0.7), epsilon = 1e-10);
    }

    #[test]
    fn coherent_mixture_matches_fock() {
        let amps = [c(0.9, 0.2), c(-0.5, 0.6), c(0.1, -1.1), c(0.0, 0.0)];
        let w = [0.4, 0.3, 0.2, 0.1];
        let g = MixtureGram::new(&amps.map(|a| vec![a]), &[0.0], DEFAULT_TAIL_TOL).unwrap();
        let rho = mixture_of_coherent(&amps, &w, Some(40)).unwrap();
        assert_abs_diff_eq!(
            g.entropy(&w).unwrap(),
            von_neumann_entropy(&rho).unwrap(),
            epsilon = 1e-10
        );
        // Unnormalized weights give the same state.
        assert_abs_diff_eq!(
            g.entropy(&w.map(|x| 3.0 * x)).unwrap(),
            g.entropy(&w).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn two_mode_gaussian_mixture_matches_fock() {
        let input = GaussianState::thermal(0.3)
            .unwrap()
            .tensor(&GaussianState::tmsv(1.6).unwrap());
        let bs = crate::gaussian_engine::SymplecticMap::beam_splitter(0.4, 3, 0, 1).unwrap();
        let s = crate::gaussian_engine::evolve(&input, &bs).unwrap();
        let eve = s.reduce(&[1, 2]).unwrap();
        let fms = [
            DVector::from_vec(vec![0.4, -0.2, 0.1, 0.3]),
            DVector::from_vec(vec![-0.3, 0.5, 0.0, -0.2]),
        ];
        let w = [0.65, 0.35];
        let g = MixtureGram::gaussian(eve.cm(), &fms, 1e-13).unwrap();
        let kernel = FockKernel::new(eve.cm()).unwrap();
        let mut mat = kernel.expand(&fms[0], &[24, 24]).unwrap().mat() * c(w[0], 0.0);
        mat += kernel.expand(&fms[1], &[24, 24]).unwrap().mat() * c(w[1], 0.0);
        let fock = crate::fock_space::hermitian_entropy(mat).unwrap();
        assert_abs_diff_eq!(g.entropy(&w).unwrap(), fock, epsilon = 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let g = MixtureGram::new(&[vec![c(0.0, 0.0)]], &[0.0], DEFAULT_TAIL_TOL).unwrap();
        assert!(g.entropy(&[0.0]).is_err());
        assert!(g.entropy(&[1.0, 1.0]).is_err());
        assert!(MixtureGram::new(&[], &[0.0], DEFAULT_TAIL_TOL).is_err());
        assert!(MixtureGram::new(&[vec![c(0.0, 0.0)]], &[-1.0], DEFAULT_TAIL_TOL).is_err());
    }

    proptest! {
        #[test]
        fn bounded_by_log_components(
            a in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..6),
            n in 0.0f64..0.5,
        ) {
            let amps: Vec<Vec<Complex64>> = a.iter().map(|(r, i)| vec![c(*r, *i)]).collect();
            let w = vec![1.0; amps.len()];
            let g = MixtureGram::new(&amps, &[n], 1e-12).unwrap();
            let s = g.entropy(&w).unwrap();
            prop_assert!(s >= thermal_entropy(n) - 1e-8);
            prop_assert!(s <= thermal_entropy(n) + (amps.len() as f64).log2() + 1e-8);
        }
    }
}
