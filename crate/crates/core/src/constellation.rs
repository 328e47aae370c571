//! Discrete constellations: square QAM (uniform or Maxwell–Boltzmann shaped),
//! PSK, and the Gaussian-modulation descriptor used as a benchmark.
//!
//! Amplitudes are coherent-state amplitudes `x_A + i y_A`; the mean energy of
//! a constellation is `Σ p |x_A + i y_A|²` photons. Shaping is parametrized by
//! the dimensionless `ν = β Δ²`, so the one-dimensional weights depend on the
//! lattice index alone and the energy constraint fixes `Δ` in closed form.

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Points per quadrature must be a power of two, at least 2.
fn check_levels(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return domain(format!("points per quadrature must be a power of two >= 2, got {m}"));
    }
    Ok(())
}

/// One-dimensional lattice `{ n Δ : n = -(M-1)/2, ..., (M-1)/2 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice1D {
    m: usize,
    delta: f64,
}

impl Lattice1D {
    pub fn new(m: usize, delta: f64) -> Result<Self> {
        check_levels(m)?;
        if !(delta > 0.0) || !delta.is_finite() {
            return domain(format!("lattice spacing must be positive, got {delta}"));
        }
        Ok(Self { m, delta })
    }

    pub fn levels(&self) -> usize {
        self.m
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Odd integers `2n`, from `-(M-1)` to `M-1`. Kept exact so points are
    /// scaled by `Δ` only once.
    pub fn doubled_indices(&self) -> impl Iterator<Item = i64> + '_ {
        let top = self.m as i64 - 1;
        (0..self.m as i64).map(move |k| 2 * k - top)
    }

    /// Half-integer indices `n`.
    pub fn indices(&self) -> Vec<f64> {
        self.doubled_indices().map(|k| k as f64 / 2.0).collect()
    }

    pub fn points(&self) -> Vec<f64> {
        self.doubled_indices().map(|k| k as f64 * self.delta / 2.0).collect()
    }
}

/// Maxwell–Boltzmann weights over the `M` lattice indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedDistribution1D {
    pub weights: Vec<f64>,
    /// Inverse temperature `β = ν / Δ²`; zero until a spacing is fixed.
    pub beta: f64,
    pub nu: f64,
}

impl ShapedDistribution1D {
    /// `E[n²]` under these weights, with `n` the half-integer lattice index.
    pub fn index_second_moment(&self) -> f64 {
        let m = self.weights.len() as i64;
        self.weights
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let n = (2 * k as i64 - (m - 1)) as f64 / 2.0;
                w * n * n
            })
            .sum()
    }
}

/// Closed-form spacing of the uniform `M`-level lattice with energy `n̄`.
pub fn solve_delta_uniform(m: usize, nbar: f64) -> Result<f64> {
    check_levels(m)?;
    if !(nbar > 0.0) || !nbar.is_finite() {
        return domain(format!("mean energy must be positive, got {nbar}"));
    }
    let mf = m as f64;
    Ok((6.0 * nbar / (mf * mf - 1.0)).sqrt())
}

/// Weights `∝ exp(-ν n²)` over the half-integer indices of an `M`-level lattice.
pub fn mb_weights(nu: f64, m: usize) -> Result<ShapedDistribution1D> {
    check_levels(m)?;
    if !(nu >= 0.0) {
        return domain(format!("shaping parameter must be nonnegative, got {nu}"));
    }
    let top = m as i64 - 1;
    // Offset by the innermost n² = 1/4 so the largest weight is exp(0).
    let raw: Vec<f64> = (0..m as i64)
        .map(|k| {
            let n = (2 * k - top) as f64 / 2.0;
            if nu.is_infinite() {
                if n.abs() == 0.5 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-nu * (n * n - 0.25)).exp()
            }
        })
        .collect();
    let z: f64 = raw.iter().sum();
    Ok(ShapedDistribution1D {
        weights: raw.into_iter().map(|w| w / z).collect(),
        beta: 0.0,
        nu,
    })
}

/// Spacing and inverse temperature satisfying `Σ w(n) (nΔ)² = n̄ / 2`.
pub fn solve_delta_mb(nu: f64, m: usize, nbar: f64) -> Result<(f64, f64)> {
    let dist = mb_weights(nu, m)?;
    if !(nbar > 0.0) || !nbar.is_finite() {
        return domain(format!("mean energy must be positive, got {nbar}"));
    }
    let second = dist.index_second_moment();
    let delta = (nbar / (2.0 * second)).sqrt();
    Ok((delta, nu / (delta * delta)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    QamUniform,
    QamMb,
    Psk,
    /// Arbitrary symbol list built with [`Constellation::from_symbols`].
    Custom,
    /// Gaussian modulation; carries no symbol list.
    Gg02,
}

/// Shaping metadata of a QAM constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct QamShaping {
    pub levels: usize,
    pub delta: f64,
    pub nu: f64,
    pub beta: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    symbols: Vec<Complex64>,
    probs: Vec<f64>,
    kind: ConstellationKind,
    mean_energy: f64,
    shaping: Option<QamShaping>,
    /// Distinct in-phase amplitudes with their marginal probabilities.
    x_levels: Vec<(f64, f64)>,
}

impl Constellation {
    /// Builds a constellation from explicit symbols. The mean energy is
    /// whatever the symbols carry.
    pub fn from_symbols(symbols: Vec<Complex64>, probs: Vec<f64>) -> Result<Self> {
        if symbols.is_empty() || symbols.len() != probs.len() {
            return domain("symbols and probabilities must be nonempty and of equal length");
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return domain("probabilities must be nonnegative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return domain(format!("probabilities sum to {total}, not 1"));
        }
        let mean_energy = symbols.iter().zip(&probs).map(|(s, p)| p * s.norm_sqr()).sum();
        let x_levels = marginalize_x(&symbols, &probs);
        Ok(Self {
            symbols,
            probs,
            kind: ConstellationKind::Custom,
            mean_energy,
            shaping: None,
            x_levels,
        })
    }

    /// Gaussian-modulation descriptor with per-quadrature variance `n̄/2`.
    pub fn gg02(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return domain(format!("mean energy must be nonnegative, got {nbar}"));
        }
        Ok(Self {
            symbols: Vec::new(),
            probs: Vec::new(),
            kind: ConstellationKind::Gg02,
            mean_energy: nbar,
            shaping: None,
            x_levels: Vec::new(),
        })
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn mean_energy(&self) -> f64 {
        self.mean_energy
    }

    pub fn shaping(&self) -> Option<&QamShaping> {
        self.shaping.as_ref()
    }

    pub fn is_discrete(&self) -> bool {
        self.kind != ConstellationKind::Gg02
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Distinct `x_A` values and their marginal probabilities, ascending.
    pub fn x_levels(&self) -> &[(f64, f64)] {
        &self.x_levels
    }

    /// Gaussian variance per quadrature of the GG02 source (`Σ² = n̄/2`).
    pub fn gg02_variance(&self) -> Option<f64> {
        (self.kind == ConstellationKind::Gg02).then(|| self.mean_energy / 2.0)
    }
}

fn marginalize_x(symbols: &[Complex64], probs: &[f64]) -> Vec<(f64, f64)> {
    let mut pairs: Vec<(f64, f64)> = symbols.iter().zip(probs).map(|(s, p)| (s.re, *p)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = pairs.iter().fold(0.0_f64, |acc, (x, _)| acc.max(x.abs())).max(1.0);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, p) in pairs {
        match out.last_mut() {
            Some(last) if (last.0 - x).abs() <= 1e-12 * scale => last.1 += p,
            _ => out.push((x, p)),
        }
    }
    out
}

/// Square `M × M` QAM with Maxwell–Boltzmann shaping `ν` (uniform at `ν = 0`)
/// and mean energy `n̄`.
pub fn build_qam(m: usize, nbar: f64, nu: f64) -> Result<Constellation> {
    let (delta, beta) = solve_delta_mb(nu, m, nbar)?;
    let mut dist = mb_weights(nu, m)?;
    dist.beta = beta;
    let lattice = Lattice1D::new(m, delta)?;
    let points = lattice.points();

    let mut symbols = Vec::with_capacity(m * m);
    let mut probs = Vec::with_capacity(m * m);
    for (x, wx) in points.iter().zip(&dist.weights) {
        for (y, wy) in points.iter().zip(&dist.weights) {
            symbols.push(Complex64::new(*x, *y));
            probs.push(wx * wy);
        }
    }
    let x_levels = points.iter().copied().zip(dist.weights.iter().copied()).collect();
    let mean_energy = symbols.iter().zip(&probs).map(|(s, p)| p * s.norm_sqr()).sum();
    Ok(Constellation {
        symbols,
        probs,
        kind: if nu == 0.0 {
            ConstellationKind::QamUniform
        } else {
            ConstellationKind::QamMb
        },
        mean_energy,
        shaping: Some(QamShaping {
            levels: m,
            delta,
            nu,
            beta,
            weights: dist.weights,
        }),
        x_levels,
    })
}

/// `N`-PSK: equiprobable coherent states `√n̄ e^{i(2k+1)π/N}`.
pub fn build_psk(n: usize, nbar: f64) -> Result<Constellation> {
    if n < 2 {
        return domain(format!("PSK needs at least 2 symbols, got {n}"));
    }
    if !(nbar > 0.0) || !nbar.is_finite() {
        return domain(format!("mean energy must be positive, got {nbar}"));
    }
    let amp = nbar.sqrt();
    let symbols: Vec<Complex64> = (0..n)
        .map(|k| {
            let phase = (2 * k + 1) as f64 * std::f64::consts::PI / n as f64;
            Complex64::from_polar(amp, phase)
        })
        .collect();
    let probs = vec![1.0 / n as f64; n];
    let x_levels = marginalize_x(&symbols, &probs);
    Ok(Constellation {
        symbols,
        probs,
        kind: ConstellationKind::Psk,
        mean_energy: nbar,
        shaping: None,
        x_levels,
    })
}
