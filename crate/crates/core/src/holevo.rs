//! Eve's Holevo information `χ_BE` under reverse reconciliation.
//!
//! `χ = S(ρ_E) - ∫ p_B(x_B) S(ρ_{E|x_B}) dx_B`, with the integral taken on the
//! same Simpson grid as Bob's marginal. Two entropy back ends are available:
//! the Gram-matrix route of [`crate::mixture`] (default) and explicit Fock
//! matrices.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::classical_info::{p_b_given_a, BobMarginal, GridPolicy, QuadratureGrid, DENSITY_FLOOR};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::fock_space::{
    mixture_of_coherent, mixture_of_coherent_capped, thermal_entropy, von_neumann_entropy, FockDensityMatrix,
    MAX_TRACE_DEFICIT,
};
use crate::gaussian_engine::{
    condition_on_homodyne_q, cutoff_for_photons, evolve, FockKernel, GaussianState, SymplecticMap, DEFAULT_CUTOFF_CAP,
};
use crate::mixture::{MixtureGram, DEFAULT_TAIL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntropyMethod {
    Gram,
    Fock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoOptions {
    pub grid: GridPolicy,
    pub method: EntropyMethod,
    pub cutoff_cap: usize,
    /// Nodes with `p_B` below this fraction of the peak are skipped.
    pub node_drop_rel: f64,
    /// Thermal tail discarded per normal mode (Gram route).
    pub tail_tol: f64,
}

impl Default for HolevoOptions {
    fn default() -> Self {
        Self {
            grid: GridPolicy::default(),
            method: EntropyMethod::Gram,
            cutoff_cap: DEFAULT_CUTOFF_CAP,
            node_drop_rel: 1e-12,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoResult {
    pub chi: f64,
    pub s_total: f64,
    pub s_cond_avg: f64,
    /// Fock cutoff (Fock route) or thermal levels per component (Gram route).
    pub cutoff_used: usize,
    pub grid_points: usize,
}

fn finish(s_total: f64, s_cond_avg: f64, cutoff_used: usize, grid_points: usize) -> Result<HolevoResult> {
    let mut chi = s_total - s_cond_avg;
    if !chi.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite Holevo information ({s_total} - {s_cond_avg})"
        )));
    }
    if chi < -1e-9 {
        return Err(Error::Numerical(format!("negative Holevo information {chi:.3e}")));
    }
    if chi < 0.0 {
        chi = 0.0;
    }
    Ok(HolevoResult {
        chi,
        s_total,
        s_cond_avg: s_total - chi,
        cutoff_used,
        grid_points,
    })
}

/// Grid nodes with their Simpson weights, `p_B`, and per-symbol mixing weights
/// `prob_i p(x_B | x_i)`; light nodes are removed.
struct Nodes {
    x: Vec<f64>,
    quad_weight: Vec<f64>,
    p_b: Vec<f64>,
    mix: Vec<Vec<f64>>,
    grid_points: usize,
}

fn nodes(constellation: &Constellation, channel: &ChannelParams, opts: &HolevoOptions) -> Result<Nodes> {
    let bob = BobMarginal::new(constellation, channel)?;
    let grid = bob.grid(&opts.grid)?;
    nodes_on_grid(constellation, channel, &grid, opts.node_drop_rel)
}

fn nodes_on_grid(
    constellation: &Constellation,
    channel: &ChannelParams,
    grid: &QuadratureGrid,
    drop_rel: f64,
) -> Result<Nodes> {
    let syms = constellation.symbols();
    let probs = constellation.probs();
    let mut all: Vec<(f64, f64, f64, Vec<f64>)> = Vec::with_capacity(grid.len());
    for (x, w) in grid.points().iter().zip(grid.weights()) {
        let mix: Vec<f64> = syms
            .iter()
            .zip(probs)
            .map(|(s, p)| p * p_b_given_a(*x, s.re, channel))
            .collect();
        let p_b: f64 = mix.iter().sum();
        all.push((*x, *w, p_b, mix));
    }
    let peak = all.iter().map(|n| n.2).fold(0.0, f64::max);
    let mut out = Nodes {
        x: Vec::new(),
        quad_weight: Vec::new(),
        p_b: Vec::new(),
        mix: Vec::new(),
        grid_points: grid.len(),
    };
    for (x, w, p, mix) in all {
        if p < DENSITY_FLOOR || p < drop_rel * peak {
            continue;
        }
        out.x.push(x);
        out.quad_weight.push(w);
        out.p_b.push(p);
        out.mix.push(mix);
    }
    Ok(out)
}

/// `Σ_j w_j p_B(x_j) S_j` in grid order.
fn average(nodes: &Nodes, entropies: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((w, p), s) in nodes.quad_weight.iter().zip(&nodes.p_b).zip(entropies) {
        acc += w * p * s;
    }
    acc
}

fn require_discrete(constellation: &Constellation) -> Result<()> {
    if constellation.is_discrete() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "Gaussian modulation has a closed-form Holevo bound".into(),
        ))
    }
}

/// Holevo information of the pure-loss wiretap channel, where Eve holds the
/// coherent states `|√(1-η) α_i⟩`.
pub fn holevo_pure_loss(
    constellation: &Constellation,
    channel: &ChannelParams,
    opts: &HolevoOptions,
) -> Result<HolevoResult> {
    require_discrete(constellation)?;
    if !channel.is_pure_loss() {
        return Err(Error::Unsupported("pure-loss pipeline needs zero excess noise".into()));
    }
    let r = (1.0 - channel.eta()).sqrt();
    let amps: Vec<Complex64> = constellation.symbols().iter().map(|s| s * r).collect();
    let nodes = nodes(constellation, channel, opts)?;
    match opts.method {
        EntropyMethod::Gram => {
            let gram = MixtureGram::new(
                &amps.iter().map(|a| vec![*a]).collect::<Vec<_>>(),
                &[0.0],
                opts.tail_tol,
            )?;
            let s_total = gram.entropy(constellation.probs())?;
            let s: Vec<f64> = nodes.mix.par_iter().map(|w| gram.entropy(w)).collect::<Result<_>>()?;
            finish(s_total, average(&nodes, &s), 1, nodes.grid_points)
        }
        EntropyMethod::Fock => {
            let rho_e = mixture_of_coherent_capped(&amps, constellation.probs(), opts.cutoff_cap)?;
            let cutoff = rho_e.dim() - 1;
            let s_total = von_neumann_entropy(&rho_e)?;
            let s: Vec<f64> = nodes
                .mix
                .par_iter()
                .zip(&nodes.p_b)
                .map(|(w, p)| {
                    let w: Vec<f64> = w.iter().map(|v| v / p).collect();
                    mixture_of_coherent(&amps, &w, Some(cutoff)).and_then(|r| von_neumann_entropy(&r))
                })
                .collect::<Result<_>>()?;
            finish(s_total, average(&nodes, &s), cutoff, nodes.grid_points)
        }
    }
}

/// Joint state of Bob's mode and Eve's two modes after the entangling cloner,
/// for one transmitted symbol. Mode order: Bob, Eve's reflected mode, Eve's
/// retained TMSV arm.
#[derive(Debug, Clone)]
pub struct EveThermal {
    joint: GaussianState,
}

impl EveThermal {
    pub fn joint(&self) -> &GaussianState {
        &self.joint
    }

    /// Eve's unconditional two-mode state.
    pub fn eve(&self) -> GaussianState {
        self.joint.reduce(&[1, 2]).expect("three-mode state")
    }

    /// Eve's state given Bob's homodyne outcome `x_b`, and the outcome
    /// density.
    pub fn conditional(&self, x_b: f64) -> Result<(GaussianState, f64)> {
        condition_on_homodyne_q(&self.joint, 0, x_b)
    }
}

pub fn eve_states_thermal(x_a: f64, y_a: f64, channel: &ChannelParams) -> Result<EveThermal> {
    let eta = channel.eta();
    if !(eta < 1.0) {
        return Err(Error::Singularity("entangling cloner needs eta < 1".into()));
    }
    let input = GaussianState::coherent(x_a, y_a).tensor(&GaussianState::tmsv(channel.v_eps())?);
    let bs = SymplecticMap::beam_splitter(eta, 3, 0, 1)?;
    Ok(EveThermal {
        joint: evolve(&input, &bs)?,
    })
}

/// Holevo information under the entangling-cloner attack with excess noise.
pub fn holevo_thermal(
    constellation: &Constellation,
    channel: &ChannelParams,
    opts: &HolevoOptions,
) -> Result<HolevoResult> {
    require_discrete(constellation)?;
    if channel.is_pure_loss() {
        return Err(Error::Unsupported("thermal pipeline needs nonzero excess noise".into()));
    }
    let states: Vec<EveThermal> = constellation
        .symbols()
        .iter()
        .map(|s| eve_states_thermal(s.re, s.im, channel))
        .collect::<Result<_>>()?;
    let eve: Vec<GaussianState> = states.iter().map(|s| s.eve()).collect();
    let eve_cm = eve[0].cm().clone();
    let eve_fms: Vec<DVector<f64>> = eve.iter().map(|s| s.fm().clone()).collect();
    let nodes = nodes(constellation, channel, opts)?;

    match opts.method {
        EntropyMethod::Gram => {
            let gram = MixtureGram::gaussian(&eve_cm, &eve_fms, opts.tail_tol)?;
            let s_total = gram.entropy(constellation.probs())?;
            // A common outcome-dependent displacement is unitary, so the
            // conditional mixtures can all be built at x_B = 0.
            let cond: Vec<GaussianState> = states
                .iter()
                .map(|s| s.conditional(0.0).map(|c| c.0))
                .collect::<Result<_>>()?;
            let cond_fms: Vec<DVector<f64>> = cond.iter().map(|c| c.fm().clone()).collect();
            let cond_gram = MixtureGram::gaussian(cond[0].cm(), &cond_fms, opts.tail_tol)?;
            let s: Vec<f64> = nodes
                .mix
                .par_iter()
                .map(|w| cond_gram.entropy(w))
                .collect::<Result<_>>()?;
            finish(
                s_total,
                average(&nodes, &s),
                gram.levels().max(cond_gram.levels()),
                nodes.grid_points,
            )
        }
        EntropyMethod::Fock => {
            let cutoffs = two_mode_cutoffs(eve.iter(), opts.cutoff_cap);
            let kernel = FockKernel::new(&eve_cm)?;
            let rho_e = fock_mixture(&kernel, &eve_fms, constellation.probs(), &cutoffs)?;
            let s_total = von_neumann_entropy(&rho_e)?;

            let (lo, hi) = (nodes.x[0], nodes.x[nodes.x.len() - 1]);
            let mut extremes = Vec::new();
            for s in &states {
                extremes.push(s.conditional(lo)?.0);
                extremes.push(s.conditional(hi)?.0);
            }
            let cond_cutoffs = two_mode_cutoffs(extremes.iter(), opts.cutoff_cap);
            let cond_kernel = FockKernel::new(extremes[0].cm())?;
            let s: Vec<f64> = nodes
                .x
                .par_iter()
                .zip(&nodes.mix)
                .map(|(x, w)| {
                    let fms: Vec<DVector<f64>> = states
                        .iter()
                        .map(|s| s.conditional(*x).map(|c| c.0.fm().clone()))
                        .collect::<Result<_>>()?;
                    let total: f64 = w.iter().sum();
                    let w: Vec<f64> = w.iter().map(|v| v / total).collect();
                    let rho = fock_mixture(&cond_kernel, &fms, &w, &cond_cutoffs)?;
                    von_neumann_entropy(&rho)
                })
                .collect::<Result<_>>()?;
            let used = cutoffs.iter().chain(&cond_cutoffs).copied().max().unwrap_or(0);
            finish(s_total, average(&nodes, &s), used, nodes.grid_points)
        }
    }
}

fn two_mode_cutoffs<'a>(states: impl Iterator<Item = &'a GaussianState>, cap: usize) -> Vec<usize> {
    let mut max_n = [0.0f64; 2];
    for s in states {
        for (m, v) in max_n.iter_mut().enumerate() {
            *v = v.max(s.mean_photons(m));
        }
    }
    max_n.iter().map(|n| cutoff_for_photons(*n, cap)).collect()
}

/// `Σ w_i ρ_i` of Gaussian states sharing one covariance, in a truncated
/// Fock basis.
pub fn fock_mixture(
    kernel: &FockKernel,
    fms: &[DVector<f64>],
    weights: &[f64],
    cutoffs: &[usize],
) -> Result<FockDensityMatrix> {
    let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
    let size: usize = dims.iter().product();
    let mut mat = nalgebra::DMatrix::<Complex64>::zeros(size, size);
    for (fm, w) in fms.iter().zip(weights) {
        if *w != 0.0 {
            mat += kernel.expand(fm, cutoffs)?.mat() * Complex64::new(*w, 0.0);
        }
    }
    let total: f64 = weights.iter().sum();
    let rho = FockDensityMatrix::from_matrix(dims, mat)?;
    let deficit = rho.trace_deficit() - (1.0 - total).max(0.0);
    if deficit > MAX_TRACE_DEFICIT {
        log::warn!("two-mode Fock cutoffs {cutoffs:?} leave trace deficit {deficit:.3e}");
        let worst = cutoffs.iter().copied().max().unwrap_or(0);
        return Err(Error::Cutoff {
            cutoff: worst,
            deficit,
            suggested: worst + worst / 2,
        });
    }
    Ok(rho)
}

/// Holevo information of Gaussian modulation against the entangling cloner
/// on a pure-loss channel.
pub fn gg02_holevo(nbar: f64, channel: &ChannelParams) -> Result<f64> {
    if !(nbar >= 0.0) || !nbar.is_finite() {
        return Err(Error::Domain(format!(
            "modulation energy must be nonnegative, got {nbar}"
        )));
    }
    if !channel.is_pure_loss() {
        return Err(Error::Unsupported(
            "closed-form benchmark assumes zero excess noise".into(),
        ));
    }
    let eta = channel.eta();
    let v = 1.0 + 2.0 * nbar;
    let v_e = 1.0 + 2.0 * (1.0 - eta) * nbar;
    let v_bar = ((eta + (1.0 - eta) * v) / (1.0 - eta + eta * v) * v).sqrt();
    let chi = thermal_entropy((v_e - 1.0) / 2.0) - thermal_entropy((v_bar - 1.0) / 2.0);
    Ok(chi.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_psk, build_qam};
    use approx::assert_abs_diff_eq;

    fn opts(points: usize) -> HolevoOptions {
        HolevoOptions {
            grid: GridPolicy::with_points(points),
            ..Default::default()
        }
    }

    #[test]
    fn pure_loss_trivial_limits() {
        let c = build_qam(2, 1.0, 0.0).unwrap();
        let r = holevo_pure_loss(&c, &ChannelParams::pure_loss(0.0).unwrap(), &opts(401)).unwrap();
        assert_abs_diff_eq!(r.chi, 0.0, epsilon = 1e-12);
        let c = build_qam(4, 1e-8, 0.0).unwrap();
        let r = holevo_pure_loss(&c, &ChannelParams::pure_loss(20.0).unwrap(), &opts(401)).unwrap();
        assert!(r.chi < 1e-6);
        let single = Constellation::from_symbols(vec![Complex64::new(0.7, 0.2)], vec![1.0]).unwrap();
        let r = holevo_pure_loss(&single, &ChannelParams::pure_loss(20.0).unwrap(), &opts(401)).unwrap();
        assert_abs_diff_eq!(r.chi, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.s_total, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn pipelines_reject_wrong_regime() {
        let c = build_qam(2, 1.0, 0.0).unwrap();
        let noisy = ChannelParams::from_distance(20.0, 0.2, 0.01).unwrap();
        assert!(holevo_pure_loss(&c, &noisy, &opts(101)).is_err());
        assert!(holevo_thermal(&c, &ChannelParams::pure_loss(20.0).unwrap(), &opts(101)).is_err());
        let g = Constellation::gg02(1.0).unwrap();
        assert!(holevo_pure_loss(&g, &ChannelParams::pure_loss(20.0).unwrap(), &opts(101)).is_err());
    }

    #[test]
    fn gram_and_fock_agree_pure_loss() {
        let c = build_qam(4, 1.0, 0.5).unwrap();
        let ch = ChannelParams::from_transmissivity(0.5, 0.0).unwrap();
        let g = holevo_pure_loss(&c, &ch, &opts(601)).unwrap();
        let f = holevo_pure_loss(
            &c,
            &ch,
            &HolevoOptions {
                method: EntropyMethod::Fock,
                ..opts(601)
            },
        )
        .unwrap();
        assert_abs_diff_eq!(g.chi, f.chi, epsilon = 1e-7);
        assert_abs_diff_eq!(g.chi, g.s_total - g.s_cond_avg, epsilon = 1e-9);
        assert!(g.chi <= g.s_total + 1e-9);
        assert!(g.chi <= 4.0);
    }

    /// χ for QAM4 by trapezoids on an independent grid four times finer.
    #[test]
    fn qam4_trapezoid_refinement() {
        let c = build_qam(2, 1.0, 0.0).unwrap();
        let ch = ChannelParams::from_transmissivity(0.5, 0.0).unwrap();
        let r = holevo_pure_loss(&c, &ch, &HolevoOptions::default()).unwrap();

        let amps: Vec<Complex64> = c.symbols().iter().map(|s| s * 0.5f64.sqrt()).collect();
        let s_tot = von_neumann_entropy(&mixture_of_coherent(&amps, c.probs(), Some(30)).unwrap()).unwrap();
        let var = ch.sigma_eps_sq();
        let spread = c
            .symbols()
            .iter()
            .map(|s| (2.0 * 0.5f64.sqrt() * s.re).abs())
            .fold(0.0, f64::max);
        let (lo, hi) = (-spread - 8.0 * var.sqrt(), spread + 8.0 * var.sqrt());
        let n = 4 * 1200;
        let h = (hi - lo) / n as f64;
        let mut avg = 0.0;
        for j in 0..=n {
            let x = lo + h * j as f64;
            let w: Vec<f64> = c
                .symbols()
                .iter()
                .zip(c.probs())
                .map(|(s, p)| {
                    let m = 2.0 * 0.5f64.sqrt() * s.re;
                    p * (-(x - m).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
                })
                .collect();
            let pb: f64 = w.iter().sum();
            let norm: Vec<f64> = w.iter().map(|v| v / pb).collect();
            let s = von_neumann_entropy(&mixture_of_coherent(&amps, &norm, Some(30)).unwrap()).unwrap();
            let tw = if j == 0 || j == n { 0.5 } else { 1.0 };
            avg += tw * h * pb * s;
        }
        assert_abs_diff_eq!(r.chi, s_tot - avg, epsilon = 1e-5);
    }

    #[test]
    fn pure_loss_mixture_consistency() {
        let c = build_qam(2, 1.2, 0.0).unwrap();
        let ch = ChannelParams::pure_loss(15.0).unwrap();
        let r = (1.0 - ch.eta()).sqrt();
        let amps: Vec<Complex64> = c.symbols().iter().map(|s| s * r).collect();
        let rho_e = mixture_of_coherent(&amps, c.probs(), Some(25)).unwrap();
        let o = HolevoOptions::default();
        let n = nodes(&c, &ch, &o).unwrap();
        let mut acc = nalgebra::DMatrix::<Complex64>::zeros(26, 26);
        for j in 0..n.x.len() {
            let w: Vec<f64> = n.mix[j].iter().map(|v| v / n.p_b[j]).collect();
            let cond = mixture_of_coherent(&amps, &w, Some(25)).unwrap();
            acc += cond.mat() * Complex64::new(n.quad_weight[j] * n.p_b[j], 0.0);
        }
        let avg = FockDensityMatrix::from_matrix(vec![26], acc).unwrap();
        assert!(avg.trace_distance(&rho_e).unwrap() < 1e-6);
    }

    #[test]
    fn grid_convergence_pure_loss() {
        let c = build_qam(4, 2.0, 0.3).unwrap();
        let ch = ChannelParams::pure_loss(40.0).unwrap();
        let a = holevo_pure_loss(&c, &ch, &opts(1201)).unwrap();
        let b = holevo_pure_loss(&c, &ch, &opts(2401)).unwrap();
        assert!((a.chi - b.chi).abs() < 1e-5);
        let tight = HolevoOptions {
            tail_tol: 1e-14,
            ..opts(1201)
        };
        assert!((holevo_pure_loss(&c, &ch, &tight).unwrap().chi - a.chi).abs() < 1e-9);
    }

    #[test]
    fn psk_bounded_by_symbol_entropy() {
        let c = build_psk(8, 3.0).unwrap();
        let r = holevo_pure_loss(&c, &ChannelParams::pure_loss(5.0).unwrap(), &opts(801)).unwrap();
        assert!(r.chi > 0.0 && r.chi <= 3.0 + 1e-9);
    }

    #[test]
    fn eve_states_limits() {
        let ch = ChannelParams::from_distance(30.0, 0.2, 1e-12).unwrap();
        let e = eve_states_thermal(0.8, -0.3, &ch).unwrap();
        let eve = e.eve();
        let r = (1.0 - ch.eta()).sqrt();
        assert_abs_diff_eq!(eve.fm()[0], -2.0 * r * 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(eve.fm()[1], 2.0 * r * 0.3, epsilon = 1e-12);
        assert!((eve.cm() - nalgebra::DMatrix::identity(4, 4)).amax() < 1e-5);

        let ch = ChannelParams::from_distance(30.0, 0.2, 0.05).unwrap();
        let e = eve_states_thermal(0.8, -0.3, &ch).unwrap();
        assert_abs_diff_eq!(e.joint().cm()[(0, 0)], ch.sigma_eps_sq(), epsilon = 1e-12);
        assert_abs_diff_eq!(e.joint().fm()[0], 2.0 * ch.eta().sqrt() * 0.8, epsilon = 1e-12);
        let (c1, _) = e.conditional(-1.0).unwrap();
        let (c2, _) = e.conditional(2.5).unwrap();
        assert!((c1.cm() - c2.cm()).amax() < 1e-14);
        // The global state is pure, so the conditional one is as well.
        for nu in c1.symplectic_eigenvalues().unwrap() {
            assert_abs_diff_eq!(nu, 1.0, epsilon = 1e-9);
        }
        assert!(eve_states_thermal(0.0, 0.0, &ChannelParams::pure_loss(0.0).unwrap()).is_err());
    }

    #[test]
    fn thermal_gram_matches_fock() {
        let c = build_qam(2, 0.8, 0.0).unwrap();
        let ch = ChannelParams::from_distance(25.0, 0.2, 0.05).unwrap();
        let g = holevo_thermal(&c, &ch, &opts(401)).unwrap();
        let f = holevo_thermal(
            &c,
            &ch,
            &HolevoOptions {
                method: EntropyMethod::Fock,
                ..opts(401)
            },
        )
        .unwrap();
        assert_abs_diff_eq!(g.chi, f.chi, epsilon = 1e-6);
        assert!(g.chi >= 0.0 && g.chi.is_finite());
    }

    #[test]
    fn thermal_mixture_consistency() {
        let c = build_qam(2, 0.6, 0.0).unwrap();
        let ch = ChannelParams::from_distance(20.0, 0.2, 0.04).unwrap();
        let states: Vec<EveThermal> = c
            .symbols()
            .iter()
            .map(|s| eve_states_thermal(s.re, s.im, &ch).unwrap())
            .collect();
        let eve_cm = states[0].eve().cm().clone();
        let cut = [14, 10];
        let fms: Vec<DVector<f64>> = states.iter().map(|s| s.eve().fm().clone()).collect();
        let rho_e = fock_mixture(&FockKernel::new(&eve_cm).unwrap(), &fms, c.probs(), &cut).unwrap();
        let n = nodes(&c, &ch, &opts(401)).unwrap();
        let cond_kernel = FockKernel::new(states[0].conditional(0.0).unwrap().0.cm()).unwrap();
        let mut acc = nalgebra::DMatrix::<Complex64>::zeros(rho_e.dim(), rho_e.dim());
        for j in 0..n.x.len() {
            let fms: Vec<DVector<f64>> = states
                .iter()
                .map(|s| s.conditional(n.x[j]).unwrap().0.fm().clone())
                .collect();
            let w: Vec<f64> = n.mix[j].iter().map(|v| v / n.p_b[j]).collect();
            let cond = fock_mixture(&cond_kernel, &fms, &w, &cut).unwrap();
            acc += cond.mat() * Complex64::new(n.quad_weight[j] * n.p_b[j], 0.0);
        }
        let avg = FockDensityMatrix::from_matrix(rho_e.dims().to_vec(), acc).unwrap();
        assert!(avg.trace_distance(&rho_e).unwrap() < 1e-4);
    }

    #[test]
    fn gg02_holevo_limits_and_oracle() {
        assert_eq!(gg02_holevo(0.0, &ChannelParams::pure_loss(50.0).unwrap()).unwrap(), 0.0);
        assert_abs_diff_eq!(
            gg02_holevo(3.0, &ChannelParams::pure_loss(0.0).unwrap()).unwrap(),
            0.0,
            epsilon = 1e-12
        );

        // Thermal input (variance 1 + 2n̄) on a beam splitter with vacuum;
        // Eve's conditional state follows from the Gaussian engine.
        let nbar = 1.0;
        let ch = ChannelParams::from_transmissivity(0.5, 0.0).unwrap();
        let eta = ch.eta();
        let input = GaussianState::tmsv(1.0 + 2.0 * nbar)
            .unwrap()
            .tensor(&GaussianState::vacuum(1));
        // Purify Alice's thermal mode (mode 0) with mode 1; the channel acts on
        // modes 0 and 2.
        let s = evolve(&input, &SymplecticMap::beam_splitter(eta, 3, 0, 2).unwrap()).unwrap();
        let eve = s.reduce(&[2]).unwrap();
        let v_e = eve.symplectic_eigenvalues().unwrap()[0];
        let bob_eve = s.reduce(&[0, 2]).unwrap();
        let (cond, _) = condition_on_homodyne_q(&bob_eve, 0, 0.3).unwrap();
        let v_bar = cond.cm().determinant().sqrt();
        let oracle = thermal_entropy((v_e - 1.0) / 2.0) - thermal_entropy((v_bar - 1.0) / 2.0);
        assert_abs_diff_eq!(gg02_holevo(nbar, &ch).unwrap(), oracle, epsilon = 1e-12);
        assert!(gg02_holevo(1.0, &ChannelParams::from_distance(10.0, 0.2, 0.01).unwrap()).is_err());
    }
}
