//! Bob's homodyne statistics and the Alice–Bob mutual information.
//!
//! Bob measures `q`; conditioned on Alice's in-phase amplitude `x_A` his
//! outcome is Gaussian with mean `2√η x_A` and variance `σ_ε² = 1 + ηε`.
//! The marginal entropy is integrated with composite Simpson quadrature.

use std::f64::consts::{E, PI};

use crate::channel::ChannelParams;
use crate::constellation::Constellation;
use crate::error::{domain, Error, Result};

/// Densities below this are treated as exactly zero in `p log p`.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Uniform grid with composite Simpson weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl QuadratureGrid {
    /// `n` must be odd and at least 3.
    pub fn simpson(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return domain(format!("Simpson grid needs an odd number >= 3 of points, got {n}"));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("invalid integration range [{lo}, {hi}]"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let points = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + i as f64 * h })
            .collect();
        let weights = (0..n)
            .map(|i| {
                let c = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        Ok(Self {
            points,
            weights,
            lo,
            hi,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

/// How the outcome axis is discretized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPolicy {
    pub points: usize,
    /// Half-width added beyond the extreme symbol means, in units of `σ_ε`.
    pub range_sigmas: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            points: 1201,
            range_sigmas: 8.0,
        }
    }
}

impl GridPolicy {
    pub fn with_points(points: usize) -> Self {
        Self {
            points,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInfoResult {
    pub i_ab: f64,
    pub h_b: f64,
    pub h_b_given_a: f64,
}

fn gaussian(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// `p(x_B | x_A)` for homodyne of `q` after the channel.
pub fn p_b_given_a(x_b: f64, x_a: f64, channel: &ChannelParams) -> f64 {
    gaussian(x_b, 2.0 * channel.eta().sqrt() * x_a, channel.sigma_eps_sq())
}

/// Bob's outcome density for a discrete constellation, with the `y_A`
/// marginalization done once.
#[derive(Debug, Clone)]
pub struct BobMarginal {
    /// `(mean of q_B, marginal probability)` per distinct `x_A`.
    components: Vec<(f64, f64)>,
    x_levels: Vec<f64>,
    variance: f64,
}

impl BobMarginal {
    pub fn new(constellation: &Constellation, channel: &ChannelParams) -> Result<Self> {
        if !constellation.is_discrete() {
            return Err(Error::Unsupported(
                "Gaussian modulation has no discrete outcome mixture; use the closed form".into(),
            ));
        }
        let gain = 2.0 * channel.eta().sqrt();
        Ok(Self {
            components: constellation.x_levels().iter().map(|(x, p)| (gain * x, *p)).collect(),
            x_levels: constellation.x_levels().iter().map(|(x, _)| *x).collect(),
            variance: channel.sigma_eps_sq(),
        })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Distinct `x_A` values, in the order used by [`Self::conditional`].
    pub fn x_levels(&self) -> &[f64] {
        &self.x_levels
    }

    pub fn conditional(&self, x_b: f64, level: usize) -> f64 {
        gaussian(x_b, self.components[level].0, self.variance)
    }

    pub fn density(&self, x_b: f64) -> f64 {
        self.components
            .iter()
            .map(|(mean, p)| p * gaussian(x_b, *mean, self.variance))
            .sum()
    }

    /// Simpson grid covering every component to `range_sigmas` deviations.
    pub fn grid(&self, policy: &GridPolicy) -> Result<QuadratureGrid> {
        let sigma = self.variance.sqrt();
        let (lo, hi) = self
            .components
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (m, _)| {
                (lo.min(*m), hi.max(*m))
            });
        let pad = policy.range_sigmas * sigma;
        QuadratureGrid::simpson(lo - pad, hi + pad, policy.points)
    }
}

/// Marginal outcome density `p_B(x_B)`.
pub fn p_b(x_b: f64, constellation: &Constellation, channel: &ChannelParams) -> Result<f64> {
    Ok(BobMarginal::new(constellation, channel)?.density(x_b))
}

fn entropy_integrand(p: f64) -> f64 {
    if p < DENSITY_FLOOR {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Differential entropy (bits) of a Gaussian with variance `var`.
pub fn gaussian_entropy_bits(var: f64) -> f64 {
    0.5 * (2.0 * PI * E * var).log2()
}

/// Alice–Bob mutual information (bits per channel use) of a discrete
/// constellation under homodyne detection.
pub fn mutual_information(
    constellation: &Constellation,
    channel: &ChannelParams,
    policy: &GridPolicy,
) -> Result<MutualInfoResult> {
    let bob = BobMarginal::new(constellation, channel)?;
    let grid = bob.grid(policy)?;
    let h_b = grid.integrate(|x| entropy_integrand(bob.density(x)));
    if !h_b.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite outcome entropy on grid {:?}",
            grid.range()
        )));
    }
    let h_b_given_a = gaussian_entropy_bits(bob.variance());
    let mut i_ab = h_b - h_b_given_a;
    if i_ab < 0.0 {
        if i_ab >= -1e-9 {
            i_ab = 0.0;
        } else {
            return Err(Error::Numerical(format!(
                "negative mutual information {i_ab:.3e}; refine the outcome grid"
            )));
        }
    }
    Ok(MutualInfoResult { i_ab, h_b, h_b_given_a })
}

/// Gaussian-modulation mutual information, `½ log₂(1 + 2ηn̄)`.
pub fn gg02_mutual_information(nbar: f64, channel: &ChannelParams) -> Result<f64> {
    if !channel.is_pure_loss() {
        return Err(Error::Unsupported(
            "Gaussian-modulation benchmark is defined for the pure-loss channel".into(),
        ));
    }
    if !(nbar >= 0.0) {
        return domain(format!("mean energy must be nonnegative, got {nbar}"));
    }
    Ok(0.5 * (1.0 + 2.0 * channel.eta() * nbar).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{build_psk, build_qam};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn ideal() -> ChannelParams {
        ChannelParams::pure_loss(0.0).unwrap()
    }

    #[test]
    fn simpson_weights_sum_to_length() {
        let g = QuadratureGrid::simpson(-3.0, 5.0, 101).unwrap();
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.integrate(|x| x * x * x), (625.0 - 81.0) / 4.0, epsilon = 1e-10);
        assert!(QuadratureGrid::simpson(0.0, 1.0, 4).is_err());
        assert!(QuadratureGrid::simpson(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn conditional_density_values() {
        assert_abs_diff_eq!(
            p_b_given_a(0.0, 0.0, &ideal()),
            0.398_942_280_401_432_7,
            epsilon = 1e-15
        );
        let ch = ChannelParams::pure_loss(40.0).unwrap();
        let xa = 0.8;
        let peak = p_b_given_a(2.0 * ch.eta().sqrt() * xa, xa, &ch);
        assert_abs_diff_eq!(peak, 1.0 / (2.0 * PI).sqrt(), epsilon = 1e-15);
        let g = QuadratureGrid::simpson(-12.0, 14.0, 2001).unwrap();
        let noisy = ChannelParams::from_distance(20.0, 0.2, 0.3).unwrap();
        assert_abs_diff_eq!(g.integrate(|x| p_b_given_a(x, xa, &noisy)), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn marginal_of_single_symbol_is_conditional() {
        let c = Constellation::from_symbols(vec![Complex64::new(0.0, 0.0)], vec![1.0]).unwrap();
        let ch = ChannelParams::pure_loss(10.0).unwrap();
        for x in [-2.0, 0.0, 0.7] {
            assert_abs_diff_eq!(p_b(x, &c, &ch).unwrap(), p_b_given_a(x, 0.0, &ch), epsilon = 1e-16);
        }
    }

    #[test]
    fn marginal_of_qam4_is_two_component_mixture() {
        let c = build_qam(2, 1.0, 0.0).unwrap();
        let ch = ideal();
        let h = 2f64.sqrt() / 2.0;
        for x in [-3.0, -0.4, 0.0, 1.1, 2.5] {
            let brute = 0.5 * (-(x - 2.0 * h).powi(2) / 2.0).exp() / (2.0 * PI).sqrt()
                + 0.5 * (-(x + 2.0 * h).powi(2) / 2.0).exp() / (2.0 * PI).sqrt();
            assert_abs_diff_eq!(p_b(x, &c, &ch).unwrap(), brute, epsilon = 1e-15);
            assert_abs_diff_eq!(p_b(x, &c, &ch).unwrap(), p_b(-x, &c, &ch).unwrap(), epsilon = 1e-16);
        }
    }

    #[test]
    fn gg02_descriptor_rejected() {
        let c = Constellation::gg02(1.0).unwrap();
        assert!(matches!(p_b(0.0, &c, &ideal()), Err(Error::Unsupported(_))));
        assert!(mutual_information(&c, &ideal(), &GridPolicy::default()).is_err());
    }

    #[test]
    fn gg02_closed_form() {
        let half = ChannelParams::from_transmissivity(0.5, 0.0).unwrap();
        assert_abs_diff_eq!(gg02_mutual_information(1.0, &half).unwrap(), 0.5, epsilon = 1e-14);
        assert_eq!(gg02_mutual_information(0.0, &ideal()).unwrap(), 0.0);
        let tenth = ChannelParams::pure_loss(50.0).unwrap();
        assert_abs_diff_eq!(gg02_mutual_information(5.0, &tenth).unwrap(), 0.5, epsilon = 1e-12);
        let noisy = ChannelParams::from_distance(50.0, 0.2, 0.01).unwrap();
        assert!(matches!(
            gg02_mutual_information(1.0, &noisy),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn mutual_information_limits() {
        let ch = ideal();
        let tiny = build_qam(4, 1e-8, 0.0).unwrap();
        let r = mutual_information(&tiny, &ch, &GridPolicy::default()).unwrap();
        assert!(r.i_ab < 1e-7);
        let big = build_qam(4, 1e3, 0.0).unwrap();
        let r = mutual_information(&big, &ch, &GridPolicy::default()).unwrap();
        assert!((r.i_ab - 2.0).abs() < 0.02, "{}", r.i_ab);
        assert_abs_diff_eq!(r.i_ab, r.h_b - r.h_b_given_a, epsilon = 1e-12);
    }

    #[test]
    fn capacity_and_entropy_ceilings() {
        for d in [0.0, 10.0, 50.0, 100.0] {
            let ch = ChannelParams::pure_loss(d).unwrap();
            for nbar in [0.05, 0.5, 2.0, 10.0] {
                for nu in [0.0, 0.5, 3.0] {
                    let c = build_qam(4, nbar, nu).unwrap();
                    let i = mutual_information(&c, &ch, &GridPolicy::default()).unwrap().i_ab;
                    let cap = 0.5 * (1.0 + 2.0 * ch.eta() * nbar).log2();
                    assert!(
                        i >= 0.0 && i <= cap + 1e-9 && i <= 2.0 + 1e-9,
                        "{d} {nbar} {nu} {i} {cap}"
                    );
                }
                let p = build_psk(16, nbar).unwrap();
                let i = mutual_information(&p, &ch, &GridPolicy::default()).unwrap().i_ab;
                assert!(i <= 0.5 * (1.0 + 2.0 * ch.eta() * nbar).log2() + 1e-9);
            }
        }
    }

    #[test]
    fn quadrature_converged_at_default_policy() {
        for (d, nbar, nu) in [(10.0, 1.0, 0.4), (100.0, 5.0, 0.0), (0.0, 30.0, 1.0)] {
            let ch = ChannelParams::pure_loss(d).unwrap();
            let c = build_qam(8, nbar, nu).unwrap();
            let a = mutual_information(&c, &ch, &GridPolicy::default()).unwrap().i_ab;
            let b = mutual_information(&c, &ch, &GridPolicy::with_points(2401))
                .unwrap()
                .i_ab;
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
    }
}
