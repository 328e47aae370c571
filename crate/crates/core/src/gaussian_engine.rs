//! Gaussian states in phase space: first moments and covariance matrices in
//! shot-noise units, symplectic evolution, homodyne conditioning, normal-mode
//! (Williamson) decomposition and the Fock-basis expansion of a Gaussian state.
//!
//! Quadratures are ordered `(q1, p1, ..., qn, pn)` with `q = a + a†`, so the
//! vacuum covariance is the identity and a coherent state `|α⟩` has first
//! moments `(2 Re α, 2 Im α)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock_space::FockDensityMatrix;

/// Tolerance on the uncertainty principle, shared with eigenvalue clamping.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Standard symplectic form `⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    fm: DVector<f64>,
    cm: DMatrix<f64>,
}

impl GaussianState {
    /// Validates shape, symmetry and the uncertainty principle.
    pub fn new(fm: DVector<f64>, cm: DMatrix<f64>) -> Result<Self> {
        let state = Self::new_unchecked(fm, cm)?;
        let nu = state.symplectic_eigenvalues()?;
        if let Some(bad) = nu.iter().find(|v| **v < 1.0 - PHYSICALITY_TOL) {
            return Err(Error::Physicality(*bad - 1.0));
        }
        Ok(state)
    }

    fn new_unchecked(fm: DVector<f64>, cm: DMatrix<f64>) -> Result<Self> {
        let dim = fm.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return domain(format!("first-moment vector must have even length, got {dim}"));
        }
        if cm.nrows() != dim || cm.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cm.nrows(),
            });
        }
        let scale = cm.amax().max(1.0);
        if (&cm - cm.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Numerical("covariance matrix is not symmetric".into()));
        }
        // Store the exactly symmetric part.
        let cm = (&cm + cm.transpose()) * 0.5;
        Ok(Self { fm, cm })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            fm: DVector::zeros(2 * n_modes),
            cm: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Coherent state `|x_A + i y_A⟩`.
    pub fn coherent(x_a: f64, y_a: f64) -> Self {
        Self {
            fm: DVector::from_vec(vec![2.0 * x_a, 2.0 * y_a]),
            cm: DMatrix::identity(2, 2),
        }
    }

    /// Thermal state with `nbar` mean photons.
    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return domain(format!("thermal occupation must be nonnegative, got {nbar}"));
        }
        Ok(Self {
            fm: DVector::zeros(2),
            cm: DMatrix::identity(2, 2) * (1.0 + 2.0 * nbar),
        })
    }

    /// Two-mode squeezed vacuum with single-mode variance `v_eps`.
    pub fn tmsv(v_eps: f64) -> Result<Self> {
        if !(v_eps >= 1.0) {
            return domain(format!("TMSV variance must be >= 1, got {v_eps}"));
        }
        let z = (v_eps * v_eps - 1.0).sqrt();
        let mut cm = DMatrix::identity(4, 4) * v_eps;
        cm[(0, 2)] = z;
        cm[(2, 0)] = z;
        cm[(1, 3)] = -z;
        cm[(3, 1)] = -z;
        Ok(Self {
            fm: DVector::zeros(4),
            cm,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.fm.len() / 2
    }

    pub fn fm(&self) -> &DVector<f64> {
        &self.fm
    }

    pub fn cm(&self) -> &DMatrix<f64> {
        &self.cm
    }

    /// Product state `self ⊗ other` (modes of `other` appended).
    pub fn tensor(&self, other: &Self) -> Self {
        let (a, b) = (self.fm.len(), other.fm.len());
        let mut fm = DVector::zeros(a + b);
        fm.rows_mut(0, a).copy_from(&self.fm);
        fm.rows_mut(a, b).copy_from(&other.fm);
        let mut cm = DMatrix::zeros(a + b, a + b);
        cm.view_mut((0, 0), (a, a)).copy_from(&self.cm);
        cm.view_mut((a, a), (b, b)).copy_from(&other.cm);
        Self { fm, cm }
    }

    /// Reduced state on the listed modes (partial trace over the rest).
    pub fn reduce(&self, modes: &[usize]) -> Result<Self> {
        let idx = quadrature_indices(modes, self.n_modes())?;
        let fm = DVector::from_iterator(idx.len(), idx.iter().map(|i| self.fm[*i]));
        let cm = DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cm[(idx[r], idx[c])]);
        Ok(Self { fm, cm })
    }

    /// Mean photon number of one mode.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        let (q, p) = (2 * mode, 2 * mode + 1);
        let second = self.cm[(q, q)] + self.cm[(p, p)] + self.fm[q].powi(2) + self.fm[p].powi(2);
        (second / 4.0 - 0.5).max(0.0)
    }

    /// Symplectic eigenvalues (moduli of the eigenvalues of `iΩσ`), ascending.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(williamson(&self.cm)?.nu)
    }

    /// First moments and covariance in the complex basis `(α1, α1*, ...)`.
    pub fn complex_form(&self) -> (DVector<Complex64>, DMatrix<Complex64>) {
        let u = complex_basis_transform(self.n_modes());
        let x = self.fm.map(|v| Complex64::new(v, 0.0));
        let s = self.cm.map(|v| Complex64::new(v, 0.0));
        let beta = &u * x;
        let sigma_tilde = &u * s * u.adjoint();
        (beta, sigma_tilde)
    }
}

fn quadrature_indices(modes: &[usize], n_modes: usize) -> Result<Vec<usize>> {
    let mut idx = Vec::with_capacity(2 * modes.len());
    for &m in modes {
        if m >= n_modes {
            return domain(format!("mode {m} out of range for {n_modes}-mode state"));
        }
        idx.push(2 * m);
        idx.push(2 * m + 1);
    }
    Ok(idx)
}

/// `⊕ U1` with `U1 = ½ [[1, i], [1, -i]]`.
pub fn complex_basis_transform(n_modes: usize) -> DMatrix<Complex64> {
    let mut u = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    let h = Complex64::new(0.5, 0.0);
    let ih = Complex64::new(0.0, 0.5);
    for k in 0..n_modes {
        u[(2 * k, 2 * k)] = h;
        u[(2 * k, 2 * k + 1)] = ih;
        u[(2 * k + 1, 2 * k)] = h;
        u[(2 * k + 1, 2 * k + 1)] = -ih;
    }
    u
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: DMatrix<f64>,
}

impl SymplecticMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || !n.is_multiple_of(2) || matrix.ncols() != n {
            return domain("symplectic map must be square with even dimension");
        }
        let map = Self { matrix };
        if map.symplectic_defect() > 1e-10 {
            return Err(Error::Numerical("matrix does not preserve the symplectic form".into()));
        }
        Ok(map)
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            matrix: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    /// Beam splitter of transmissivity `eta` acting on modes `a`, `b` of an
    /// `n_modes` register: `a → √η a + √(1-η) b`, `b → -√(1-η) a + √η b`.
    pub fn beam_splitter(eta: f64, n_modes: usize, a: usize, b: usize) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return domain(format!("transmissivity must lie in (0, 1], got {eta}"));
        }
        if a == b || a >= n_modes || b >= n_modes {
            return domain("beam splitter needs two distinct modes inside the register");
        }
        let t = eta.sqrt();
        let r = (1.0 - eta).sqrt();
        let mut s = DMatrix::identity(2 * n_modes, 2 * n_modes);
        for k in 0..2 {
            let (ia, ib) = (2 * a + k, 2 * b + k);
            s[(ia, ia)] = t;
            s[(ia, ib)] = r;
            s[(ib, ia)] = -r;
            s[(ib, ib)] = t;
        }
        Ok(Self { matrix: s })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `max |S Ω Sᵀ - Ω|`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }
}

/// `x → S x`, `σ → S σ Sᵀ`.
pub fn evolve(state: &GaussianState, map: &SymplecticMap) -> Result<GaussianState> {
    if state.fm.len() != map.matrix.nrows() {
        return Err(Error::DimensionMismatch {
            expected: map.matrix.nrows(),
            got: state.fm.len(),
        });
    }
    let s = &map.matrix;
    let cm = s * &state.cm * s.transpose();
    Ok(GaussianState {
        fm: s * &state.fm,
        cm: (&cm + cm.transpose()) * 0.5,
    })
}

/// Ideal homodyne of `q` on `measured_mode` with outcome `x_b`.
///
/// Returns the conditional state of the remaining modes (original order) and
/// the outcome density. Uses the exact infinite-squeezing limit: only the `q`
/// row of the correlation block enters, through `1 / σ_qq`.
pub fn condition_on_homodyne_q(state: &GaussianState, measured_mode: usize, x_b: f64) -> Result<(GaussianState, f64)> {
    let n = state.n_modes();
    if n < 2 {
        return domain("homodyne conditioning needs at least two modes");
    }
    if measured_mode >= n {
        return domain(format!("mode {measured_mode} out of range for {n}-mode state"));
    }
    let rest: Vec<usize> = (0..n).filter(|m| *m != measured_mode).collect();
    let reduced = state.reduce(&rest)?;
    let idx = quadrature_indices(&rest, n)?;
    let q = 2 * measured_mode;
    let var_q = state.cm[(q, q)];
    if !(var_q > 0.0) || !var_q.is_finite() {
        return Err(Error::Numerical(format!("degenerate homodyne variance {var_q}")));
    }
    let z = DVector::from_iterator(idx.len(), idx.iter().map(|i| state.cm[(q, *i)]));
    let shift = x_b - state.fm[q];
    let fm = &reduced.fm + &z * (shift / var_q);
    let cm = &reduced.cm - &z * z.transpose() / var_q;
    let density = (-shift * shift / (2.0 * var_q)).exp() / (2.0 * std::f64::consts::PI * var_q).sqrt();
    Ok((
        GaussianState {
            fm,
            cm: (&cm + cm.transpose()) * 0.5,
        },
        density,
    ))
}

/// Normal-mode decomposition `σ = S diag(ν1, ν1, ..., νn, νn) Sᵀ`.
#[derive(Debug, Clone)]
pub struct Williamson {
    /// Symplectic eigenvalues, ascending.
    pub nu: Vec<f64>,
    /// `S⁻¹`, mapping first moments to normal-mode coordinates.
    pub s_inv: DMatrix<f64>,
}

impl Williamson {
    /// First moments in normal-mode coordinates, as one complex amplitude
    /// per mode.
    pub fn normal_amplitudes(&self, fm: &DVector<f64>) -> Vec<Complex64> {
        let y = &self.s_inv * fm;
        (0..y.len() / 2)
            .map(|k| Complex64::new(y[2 * k] / 2.0, y[2 * k + 1] / 2.0))
            .collect()
    }

    /// Thermal occupation `(ν - 1) / 2` per normal mode, clamped at zero.
    pub fn occupations(&self) -> Vec<f64> {
        self.nu.iter().map(|v| ((v - 1.0) / 2.0).max(0.0)).collect()
    }
}

/// Williamson decomposition of a positive-definite covariance matrix.
///
/// With `K = σ^{-1/2} Ω σ^{-1/2}` (antisymmetric), pairs `(u, -Ku/|Ku|)` are
/// peeled off the `K`-invariant complement one at a time; `|Ku| = 1/ν`.
pub fn williamson(cm: &DMatrix<f64>) -> Result<Williamson> {
    let dim = cm.nrows();
    if dim == 0 || !dim.is_multiple_of(2) || cm.ncols() != dim {
        return domain("covariance matrix must be square with even dimension");
    }
    let n = dim / 2;
    let eig = cm.clone().symmetric_eigen();
    if let Some(bad) = eig.eigenvalues.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::Physicality(*bad));
    }
    let v = &eig.eigenvectors;
    let inv_sqrt = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt())) * v.transpose();
    let k = &inv_sqrt * symplectic_form(n) * &inv_sqrt;

    let mut basis = DMatrix::<f64>::identity(dim, dim);
    let mut o = DMatrix::<f64>::zeros(dim, dim);
    let mut pairs: Vec<(f64, DVector<f64>, DVector<f64>)> = Vec::with_capacity(n);
    for _ in 0..n {
        let kb = &k * &basis;
        let restricted = kb.transpose() * &kb;
        let e = restricted.symmetric_eigen();
        let top = e.eigenvalues.imax();
        let mut u = &basis * e.eigenvectors.column(top);
        u /= u.norm();
        let ku = &k * &u;
        let norm = ku.norm();
        if !(norm > 0.0) {
            return Err(Error::Numerical("singular normal-mode decomposition".into()));
        }
        let w = -&ku / norm;
        let proj = &basis * basis.transpose() - &u * u.transpose() - &w * w.transpose();
        let pe = proj.symmetric_eigen();
        let keep: Vec<usize> = (0..dim).filter(|i| pe.eigenvalues[*i] > 0.5).collect();
        basis = DMatrix::from_fn(dim, keep.len(), |r, c| pe.eigenvectors[(r, keep[c])]);
        pairs.push((1.0 / norm, u, w));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut nu = Vec::with_capacity(n);
    for (i, (v_k, u, w)) in pairs.into_iter().enumerate() {
        o.set_column(2 * i, &u);
        o.set_column(2 * i + 1, &w);
        nu.push(v_k);
    }
    let d_half = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        nu.iter().flat_map(|v| [v.sqrt(), v.sqrt()]),
    ));
    let s_inv = d_half * o.transpose() * inv_sqrt;
    Ok(Williamson { nu, s_inv })
}

/// Ceiling on per-mode Fock cutoffs.
pub const DEFAULT_CUTOFF_CAP: usize = 64;

/// Poisson-tail cutoff for a mode carrying `mean_photons` photons on average.
pub fn cutoff_for_photons(mean_photons: f64, cap: usize) -> usize {
    let mu = mean_photons.max(0.0);
    ((mu + 7.0 * mu.sqrt() + 10.0).ceil() as usize).min(cap)
}

/// Quantities of the Fock expansion that depend on the covariance only.
#[derive(Debug, Clone)]
pub struct FockKernel {
    n_modes: usize,
    u: DMatrix<Complex64>,
    sigma_q: DMatrix<Complex64>,
    sigma_q_inv: DMatrix<Complex64>,
    /// Symmetric part of `X (I - σ_Q⁻¹)`.
    a_mat: DMatrix<Complex64>,
    /// `ln det σ_Q`.
    log_det: f64,
}

/// Per-state expansion parameters (`σ_Q`, `A`, `γ`, and `ln T` up to the
/// factorials).
#[derive(Debug, Clone)]
pub struct FockExpansionParams {
    pub sigma_q: DMatrix<Complex64>,
    pub a_mat: DMatrix<Complex64>,
    pub gamma: DVector<Complex64>,
    /// `ln[ exp(-½ β† σ_Q⁻¹ β) / √det σ_Q ]`.
    pub log_prefactor: f64,
}

impl FockKernel {
    pub fn new(cm: &DMatrix<f64>) -> Result<Self> {
        let dim = cm.nrows();
        if dim == 0 || !dim.is_multiple_of(2) || cm.ncols() != dim {
            return domain("covariance matrix must be square with even dimension");
        }
        let n_modes = dim / 2;
        let u = complex_basis_transform(n_modes);
        let s = cm.map(|v| Complex64::new(v, 0.0));
        let sigma_tilde = &u * s * u.adjoint();
        let half = Complex64::new(0.5, 0.0);
        let sigma_q = &sigma_tilde + DMatrix::<Complex64>::identity(dim, dim) * half;
        let det = sigma_q.clone().determinant();
        if !(det.re > 0.0) || det.im.abs() > 1e-8 * det.re.abs().max(1.0) {
            return Err(Error::Numerical(format!("sigma_Q is singular (det = {det})")));
        }
        let sigma_q_inv = sigma_q
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numerical("sigma_Q is singular".into()))?;
        let mut x = DMatrix::<Complex64>::zeros(dim, dim);
        for k in 0..n_modes {
            x[(2 * k, 2 * k + 1)] = Complex64::new(1.0, 0.0);
            x[(2 * k + 1, 2 * k)] = Complex64::new(1.0, 0.0);
        }
        let a_raw = &x * (DMatrix::<Complex64>::identity(dim, dim) - &sigma_q_inv);
        let a_mat = (&a_raw + a_raw.transpose()) * half;
        Ok(Self {
            n_modes,
            u,
            sigma_q,
            sigma_q_inv,
            a_mat,
            log_det: det.re.ln(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn params(&self, fm: &DVector<f64>) -> Result<FockExpansionParams> {
        if fm.len() != 2 * self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n_modes,
                got: fm.len(),
            });
        }
        let beta = &self.u * fm.map(|v| Complex64::new(v, 0.0));
        let gamma = (beta.adjoint() * &self.sigma_q_inv).transpose();
        let quad = (beta.adjoint() * &self.sigma_q_inv * &beta)[(0, 0)];
        Ok(FockExpansionParams {
            sigma_q: self.sigma_q.clone(),
            a_mat: self.a_mat.clone(),
            gamma,
            log_prefactor: -0.5 * quad.re - 0.5 * self.log_det,
        })
    }

    /// Truncated Fock matrix of the state with this covariance and first
    /// moments `fm`, with per-mode cutoffs.
    pub fn expand(&self, fm: &DVector<f64>, cutoffs: &[usize]) -> Result<FockDensityMatrix> {
        if cutoffs.len() != self.n_modes {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes,
                got: cutoffs.len(),
            });
        }
        let p = self.params(fm)?;
        let nvar = 2 * self.n_modes;
        // Variable 2s is α_s (column index k_s), 2s+1 is α_s* (row index m_s).
        let extents: Vec<usize> = cutoffs.iter().flat_map(|c| [c + 1, c + 1]).collect();
        let table = derivative_table(&p.a_mat, &p.gamma, &extents);
        let strides = strides_of(&extents);

        let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
        let size: usize = dims.iter().product();
        let lf = log_factorials(cutoffs.iter().copied().max().unwrap_or(0));
        let mut mat = DMatrix::<Complex64>::zeros(size, size);
        let mut row_idx = vec![0usize; self.n_modes];
        for row in 0..size {
            unflatten(row, &dims, &mut row_idx);
            let mut col_idx = vec![0usize; self.n_modes];
            for col in 0..size {
                unflatten(col, &dims, &mut col_idx);
                let mut flat = 0;
                let mut log_fact = 0.0;
                for s in 0..self.n_modes {
                    flat += col_idx[s] * strides[2 * s] + row_idx[s] * strides[2 * s + 1];
                    log_fact += lf[col_idx[s]] + lf[row_idx[s]];
                }
                mat[(row, col)] = table[flat] * (p.log_prefactor - 0.5 * log_fact).exp();
            }
        }
        debug_assert_eq!(nvar, extents.len());
        FockDensityMatrix::from_matrix(dims, mat)
    }
}

fn strides_of(extents: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; extents.len()];
    for i in (0..extents.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * extents[i + 1];
    }
    strides
}

fn unflatten(mut flat: usize, dims: &[usize], out: &mut [usize]) {
    for i in (0..dims.len()).rev() {
        out[i] = flat % dims[i];
        flat /= dims[i];
    }
}

pub(crate) fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for i in 1..=n {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    lf
}

/// Derivatives `D_c = ∂^c exp(½ αᵀAα + γᵀα)|₀` for every multi-index `c`
/// below `extents`, via `D_{c+e_s} = γ_s D_c + Σ_t A_st c_t D_{c-e_t}`.
fn derivative_table(a: &DMatrix<Complex64>, gamma: &DVector<Complex64>, extents: &[usize]) -> Vec<Complex64> {
    let nvar = extents.len();
    let strides = strides_of(extents);
    let size: usize = extents.iter().product();
    let mut table = vec![Complex64::new(0.0, 0.0); size];
    table[0] = Complex64::new(1.0, 0.0);
    let mut idx = vec![0usize; nvar];
    for flat in 1..size {
        unflatten(flat, extents, &mut idx);
        let s = idx.iter().rposition(|c| *c > 0).expect("nonzero multi-index");
        let base = flat - strides[s];
        let mut acc = gamma[s] * table[base];
        for t in 0..nvar {
            let ct = if t == s { idx[t] - 1 } else { idx[t] };
            if ct > 0 {
                acc += a[(s, t)] * (ct as f64) * table[base - strides[t]];
            }
        }
        table[flat] = acc;
    }
    table
}

/// One element `⟨m|ρ|k⟩` of the Fock expansion of `state`.
pub fn fock_matrix_element(state: &GaussianState, m: &[usize], k: &[usize], cutoff: usize) -> Result<Complex64> {
    let n = state.n_modes();
    if m.len() != n || k.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.len().min(k.len()),
        });
    }
    if m.iter().chain(k).any(|v| *v > cutoff) {
        return domain(format!("multi-index exceeds cutoff {cutoff}"));
    }
    let kernel = FockKernel::new(state.cm())?;
    let p = kernel.params(state.fm())?;
    let extents: Vec<usize> = (0..n).flat_map(|s| [k[s] + 1, m[s] + 1]).collect();
    let table = derivative_table(&p.a_mat, &p.gamma, &extents);
    let lf = log_factorials(cutoff);
    let log_fact: f64 = (0..n).map(|s| lf[k[s]] + lf[m[s]]).sum();
    Ok(table[size_of(&extents) - 1] * (p.log_prefactor - 0.5 * log_fact).exp())
}

fn size_of(extents: &[usize]) -> usize {
    extents.iter().product()
}

/// Truncated Fock matrix with per-mode cutoffs chosen from each mode's mean
/// photon number, capped at `cap`.
pub fn fock_expand_auto(state: &GaussianState, cap: usize) -> Result<FockDensityMatrix> {
    let cutoffs: Vec<usize> = (0..state.n_modes())
        .map(|m| cutoff_for_photons(state.mean_photons(m), cap))
        .collect();
    FockKernel::new(state.cm())?.expand(state.fm(), &cutoffs)
}
