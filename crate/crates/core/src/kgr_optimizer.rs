//! Key generation rate `K = ζ I_AB - χ_BE` and its optimizations over the
//! shaping parameter `ν`, the modulation energy `n̄`, and the distance.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::channel::ChannelParams;
use crate::classical_info::{gg02_mutual_information, mutual_information};
use crate::constellation::{build_psk, build_qam, Constellation, ConstellationKind};
use crate::error::{domain, Error, Result};
use crate::holevo::{gg02_holevo, holevo_pure_loss, holevo_thermal, EntropyMethod, HolevoOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    /// Square QAM with `M` levels per quadrature (`M²` symbols).
    Qam(usize),
    Psk(usize),
    Gg02,
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Qam(m) => write!(f, "qam:{m}"),
            Self::Psk(n) => write!(f, "psk:{n}"),
            Self::Gg02 => write!(f, "gg02"),
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "gg02" {
            return Ok(Self::Gg02);
        }
        let (kind, n) = s
            .split_once(':')
            .ok_or_else(|| Error::Domain(format!("modulation must be qam:M, psk:N or gg02, got '{s}'")))?;
        let n: usize = n
            .parse()
            .map_err(|_| Error::Domain(format!("bad symbol count in '{s}'")))?;
        match kind {
            "qam" if n >= 2 && n.is_multiple_of(2) => Ok(Self::Qam(n)),
            "qam" => domain(format!("QAM needs an even level count >= 2, got {n}")),
            "psk" if n >= 2 => Ok(Self::Psk(n)),
            "psk" => domain(format!("PSK needs at least 2 symbols, got {n}")),
            _ => domain(format!("unknown modulation '{kind}'")),
        }
    }
}

/// How the shaping parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// `ν = 0`.
    Uniform,
    /// `ν` maximizing `I_AB`.
    MutualInfo,
    /// `ν` maximizing `K`.
    Kgr,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::MutualInfo => "mb-mutualinfo",
            Self::Kgr => "mb-kgr",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Self::Uniform),
            "mb-mutualinfo" => Ok(Self::MutualInfo),
            "mb-kgr" => Ok(Self::Kgr),
            other => domain(format!(
                "shaping must be uniform, mb-mutualinfo or mb-kgr, got '{other}'"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numerics {
    pub holevo: HolevoOptions,
    /// Upper end of the `ν` bracket.
    pub nu_hi: f64,
    pub nu_tol: f64,
    pub nbar_lo: f64,
    pub nbar_hi: f64,
    pub nbar_points: usize,
    /// Final bracket width of the energy refinement, in `ln n̄`.
    pub log_nbar_tol: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            holevo: HolevoOptions::default(),
            nu_hi: 80.0,
            nu_tol: 1e-4,
            nbar_lo: 0.01,
            nbar_hi: 50.0,
            nbar_points: 25,
            log_nbar_tol: 1e-3,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        let h = &self.holevo;
        if h.grid.points < 3 || h.grid.points.is_multiple_of(2) {
            return domain("simpson points must be odd and at least 3");
        }
        if !(h.grid.range_sigmas > 0.0) {
            return domain("quadrature range must be positive");
        }
        if h.cutoff_cap < 2 {
            return domain("cutoff cap must be at least 2");
        }
        if !(self.nu_hi > 0.0) || !(self.nu_tol > 0.0) {
            return domain("nu bracket and tolerance must be positive");
        }
        if !(self.nbar_lo > 0.0 && self.nbar_hi > self.nbar_lo) {
            return domain("energy scan needs 0 < nbar_lo < nbar_hi");
        }
        if self.nbar_points < 3 {
            return domain("energy scan needs at least 3 points");
        }
        if !(self.log_nbar_tol > 0.0) {
            return domain("energy tolerance must be positive");
        }
        Ok(())
    }

    /// Canonical text form; floats as bit patterns.
    pub fn describe(&self) -> String {
        let h = &self.holevo;
        let method = match h.method {
            EntropyMethod::Gram => "gram",
            EntropyMethod::Fock => "fock",
        };
        format!(
            "pts={};rng={:016x};method={};cap={};drop={:016x};tail={:016x};nuhi={:016x};nutol={:016x};lo={:016x};hi={:016x};n={};ltol={:016x}",
            h.grid.points,
            h.grid.range_sigmas.to_bits(),
            method,
            h.cutoff_cap,
            h.node_drop_rel.to_bits(),
            h.tail_tol.to_bits(),
            self.nu_hi.to_bits(),
            self.nu_tol.to_bits(),
            self.nbar_lo.to_bits(),
            self.nbar_hi.to_bits(),
            self.nbar_points,
            self.log_nbar_tol.to_bits(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgrPoint {
    pub channel: ChannelParams,
    pub nbar: f64,
    pub nu: f64,
    pub beta: f64,
    /// Lattice spacing for QAM, 0 otherwise.
    pub delta: f64,
    pub i_ab: f64,
    pub chi_be: f64,
    pub k: f64,
    pub zeta: f64,
    pub cutoff_used: usize,
    pub grid_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumRecord {
    pub k_max: f64,
    pub nbar_max: f64,
    pub nu_opt: f64,
    pub objective: Objective,
    pub feasible: bool,
    pub point: KgrPoint,
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta > 0.0 && zeta <= 1.0 {
        Ok(())
    } else {
        domain(format!("reconciliation efficiency must lie in (0, 1], got {zeta}"))
    }
}

/// `K` for a given constellation and channel.
pub fn kgr_at(
    constellation: &Constellation,
    channel: &ChannelParams,
    zeta: f64,
    numerics: &Numerics,
) -> Result<KgrPoint> {
    check_zeta(zeta)?;
    let (nu, beta, delta) = match constellation.shaping() {
        Some(s) => (s.nu, s.beta, s.delta),
        None => (0.0, 0.0, 0.0),
    };
    if constellation.kind() == ConstellationKind::Gg02 {
        let mut p = gg02_kgr(constellation.mean_energy(), channel, zeta)?;
        p.grid_points = 0;
        return Ok(p);
    }
    let i_ab = mutual_information(constellation, channel, &numerics.holevo.grid)?.i_ab;
    let h = if channel.is_pure_loss() {
        holevo_pure_loss(constellation, channel, &numerics.holevo)?
    } else {
        holevo_thermal(constellation, channel, &numerics.holevo)?
    };
    Ok(KgrPoint {
        channel: *channel,
        nbar: constellation.mean_energy(),
        nu,
        beta,
        delta,
        i_ab,
        chi_be: h.chi,
        k: zeta * i_ab - h.chi,
        zeta,
        cutoff_used: h.cutoff_used,
        grid_points: h.grid_points,
    })
}

/// Closed-form `K` of Gaussian modulation on a pure-loss channel.
pub fn gg02_kgr(nbar: f64, channel: &ChannelParams, zeta: f64) -> Result<KgrPoint> {
    check_zeta(zeta)?;
    let i_ab = gg02_mutual_information(nbar, channel)?;
    let chi_be = gg02_holevo(nbar, channel)?;
    Ok(KgrPoint {
        channel: *channel,
        nbar,
        nu: 0.0,
        beta: 0.0,
        delta: 0.0,
        i_ab,
        chi_be,
        k: zeta * i_ab - chi_be,
        zeta,
        cutoff_used: 0,
        grid_points: 0,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`, followed by
/// a comparison with both endpoints. Returns `(x, f(x))`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) || !(tol > 0.0) {
        return domain(format!("bad golden-section bracket [{lo}, {hi}] with tol {tol}"));
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x)?;
        if fx > best.1 {
            best = (x, fx);
        }
    }
    Ok(best)
}

/// Maximization over `[0, hi]` for objectives that flatten out at large
/// arguments: probe a dyadic ladder `0, hi/512, ..., hi/2, hi`, then refine
/// with golden sections between the neighbours of the best probe.
pub fn ladder_golden_max<F>(mut f: F, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > 0.0) {
        return domain(format!("search bracket must be positive, got {hi}"));
    }
    let mut xs = vec![0.0];
    xs.extend((0..=LADDER_STEPS).rev().map(|k| hi / f64::from(1u32 << k)));
    let mut fs = Vec::with_capacity(xs.len());
    for x in &xs {
        fs.push(f(*x)?);
    }
    let mut j = 0;
    for i in 1..xs.len() {
        if fs[i] > fs[j] {
            j = i;
        }
    }
    let lo = xs[j.saturating_sub(1)];
    let up = xs[(j + 1).min(xs.len() - 1)];
    let (x, fx) = golden_section_max(&mut f, lo, up, tol)?;
    Ok(if fx > fs[j] { (x, fx) } else { (xs[j], fs[j]) })
}

const LADDER_STEPS: u32 = 9;

fn check_qam(m: usize) -> Result<()> {
    if m >= 2 && m.is_multiple_of(2) {
        Ok(())
    } else {
        domain(format!("QAM needs an even level count >= 2, got {m}"))
    }
}

/// `ν` maximizing `I_AB` for `M²`-QAM at energy `nbar`.
pub fn optimize_nu_mutual_info(m: usize, nbar: f64, channel: &ChannelParams, numerics: &Numerics) -> Result<f64> {
    check_qam(m)?;
    if !(nbar > 0.0) {
        return domain(format!("modulation energy must be positive, got {nbar}"));
    }
    let grid = numerics.holevo.grid;
    let (nu, _) = ladder_golden_max(
        |nu| mutual_information(&build_qam(m, nbar, nu)?, channel, &grid).map(|r| r.i_ab),
        numerics.nu_hi,
        numerics.nu_tol,
    )?;
    Ok(nu)
}

/// Everything that determines a cached `(I_AB, χ_BE)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointKey {
    pub modulation: Modulation,
    pub objective: Objective,
    pub channel: ChannelParams,
    pub nbar: f64,
    pub nu: f64,
    pub numerics: Numerics,
}

impl PointKey {
    pub fn describe(&self) -> String {
        format!(
            "mod={};obj={};d={:016x};kappa={:016x};eps={:016x};nbar={:016x};nu={:016x};{}",
            self.modulation,
            self.objective,
            self.channel.distance_km().to_bits(),
            self.channel.kappa_db_per_km().to_bits(),
            self.channel.epsilon().to_bits(),
            self.nbar.to_bits(),
            self.nu.to_bits(),
            self.numerics.describe()
        )
    }
}

/// Values kept per cached point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CachedValue {
    pub i_ab: f64,
    pub chi_be: f64,
    pub cutoff_used: usize,
    pub grid_points: usize,
}

pub trait PointCache: Sync {
    fn lookup(&self, key: &PointKey) -> Option<CachedValue>;
    fn store(&self, key: &PointKey, value: &CachedValue);
}

/// Evaluates `K` at (modulation, `n̄`, `ν`) points, optionally through a
/// cache, and counts cache traffic.
pub struct Evaluator<'a> {
    pub numerics: Numerics,
    cache: Option<&'a dyn PointCache>,
    lookups: AtomicUsize,
    hits: AtomicUsize,
}

impl<'a> Evaluator<'a> {
    pub fn new(numerics: Numerics) -> Self {
        Self {
            numerics,
            cache: None,
            lookups: AtomicUsize::new(0),
            hits: AtomicUsize::new(0),
        }
    }

    pub fn with_cache(numerics: Numerics, cache: &'a dyn PointCache) -> Self {
        Self {
            cache: Some(cache),
            ..Self::new(numerics)
        }
    }

    /// `(lookups, hits)` so far.
    pub fn cache_stats(&self) -> (usize, usize) {
        (self.lookups.load(Ordering::Relaxed), self.hits.load(Ordering::Relaxed))
    }

    pub fn constellation(&self, modulation: Modulation, nbar: f64, nu: f64) -> Result<Constellation> {
        match modulation {
            Modulation::Qam(m) => build_qam(m, nbar, nu),
            Modulation::Psk(n) => build_psk(n, nbar),
            Modulation::Gg02 => Constellation::gg02(nbar),
        }
    }

    pub fn point(
        &self,
        modulation: Modulation,
        objective: Objective,
        channel: &ChannelParams,
        nbar: f64,
        nu: f64,
        zeta: f64,
    ) -> Result<KgrPoint> {
        check_zeta(zeta)?;
        let c = self.constellation(modulation, nbar, nu)?;
        let key = PointKey {
            modulation,
            objective,
            channel: *channel,
            nbar,
            nu,
            numerics: self.numerics,
        };
        if let Some(cache) = self.cache {
            self.lookups.fetch_add(1, Ordering::Relaxed);
            if let Some(v) = cache.lookup(&key) {
                self.hits.fetch_add(1, Ordering::Relaxed);
                let (beta, delta) = c.shaping().map(|s| (s.beta, s.delta)).unwrap_or((0.0, 0.0));
                return Ok(KgrPoint {
                    channel: *channel,
                    nbar,
                    nu,
                    beta,
                    delta,
                    i_ab: v.i_ab,
                    chi_be: v.chi_be,
                    k: zeta * v.i_ab - v.chi_be,
                    zeta,
                    cutoff_used: v.cutoff_used,
                    grid_points: v.grid_points,
                });
            }
        }
        let p = kgr_at(&c, channel, zeta, &self.numerics)?;
        if let Some(cache) = self.cache {
            cache.store(
                &key,
                &CachedValue {
                    i_ab: p.i_ab,
                    chi_be: p.chi_be,
                    cutoff_used: p.cutoff_used,
                    grid_points: p.grid_points,
                },
            );
        }
        Ok(p)
    }

    /// Best point at fixed energy under the given shaping objective.
    pub fn best_at_energy(
        &self,
        modulation: Modulation,
        objective: Objective,
        channel: &ChannelParams,
        nbar: f64,
        zeta: f64,
    ) -> Result<KgrPoint> {
        match (modulation, objective) {
            (_, Objective::Uniform) => self.point(modulation, objective, channel, nbar, 0.0, zeta),
            (Modulation::Qam(m), Objective::MutualInfo) => {
                let nu = optimize_nu_mutual_info(m, nbar, channel, &self.numerics)?;
                self.point(modulation, objective, channel, nbar, nu, zeta)
            }
            (Modulation::Qam(m), Objective::Kgr) => optimize_nu_kgr(m, nbar, channel, zeta, self),
            (other, obj) => Err(Error::Unsupported(format!(
                "{obj} shaping is defined for QAM only, not {other}"
            ))),
        }
    }
}

/// `ν` maximizing `K` directly; returns the optimal point.
pub fn optimize_nu_kgr(
    m: usize,
    nbar: f64,
    channel: &ChannelParams,
    zeta: f64,
    ev: &Evaluator<'_>,
) -> Result<KgrPoint> {
    check_qam(m)?;
    if !(nbar > 0.0) {
        return domain(format!("modulation energy must be positive, got {nbar}"));
    }
    let modulation = Modulation::Qam(m);
    let (nu, _) = ladder_golden_max(
        |nu| {
            ev.point(modulation, Objective::Kgr, channel, nbar, nu, zeta)
                .map(|p| p.k)
        },
        ev.numerics.nu_hi,
        ev.numerics.nu_tol,
    )?;
    ev.point(modulation, Objective::Kgr, channel, nbar, nu, zeta)
}

/// Maximum of `K` over the modulation energy: log-spaced scan, then
/// golden-section refinement in `ln n̄` around the best scan point.
pub fn optimize_energy(
    modulation: Modulation,
    channel: &ChannelParams,
    zeta: f64,
    objective: Objective,
    ev: &Evaluator<'_>,
) -> Result<OptimumRecord> {
    check_zeta(zeta)?;
    let n = &ev.numerics;
    n.validate()?;
    let (l0, l1) = (n.nbar_lo.ln(), n.nbar_hi.ln());
    let logs: Vec<f64> = (0..n.nbar_points)
        .map(|j| l0 + (l1 - l0) * j as f64 / (n.nbar_points - 1) as f64)
        .collect();
    let scan: Vec<KgrPoint> = logs
        .par_iter()
        .map(|l| ev.best_at_energy(modulation, objective, channel, l.exp(), zeta))
        .collect::<Result<_>>()?;
    let mut j = 0;
    for (i, p) in scan.iter().enumerate() {
        if p.k > scan[j].k {
            j = i;
        }
    }
    let mut best = scan[j];
    let lo = logs[j.saturating_sub(1)];
    let hi = logs[(j + 1).min(logs.len() - 1)];
    if hi > lo {
        let (l, _) = golden_section_max(
            |l| {
                ev.best_at_energy(modulation, objective, channel, l.exp(), zeta)
                    .map(|p| p.k)
            },
            lo,
            hi,
            n.log_nbar_tol,
        )?;
        let p = ev.best_at_energy(modulation, objective, channel, l.exp(), zeta)?;
        if p.k > best.k {
            best = p;
        }
    }
    Ok(OptimumRecord {
        k_max: best.k,
        nbar_max: best.nbar,
        nu_opt: best.nu,
        objective,
        feasible: best.k > 0.0,
        point: best,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioRow {
    pub distance_km: f64,
    pub numerator: OptimumRecord,
    pub denominator: OptimumRecord,
    /// `None` when either optimum is infeasible.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    /// Mean ratio over feasible distances of at least 80 km, or over all
    /// feasible distances when none reaches 80 km.
    pub mean: f64,
    pub averaged_over: Vec<f64>,
}

/// Distances from which ratios are averaged.
pub const RATIO_AVERAGE_FROM_KM: f64 = 80.0;

/// Mean of the `(distance, ratio)` pairs with a ratio, restricted to
/// distances of at least [`RATIO_AVERAGE_FROM_KM`] when any qualify.
pub fn mean_ratio(pairs: &[(f64, Option<f64>)]) -> Option<(f64, Vec<f64>)> {
    let feasible: Vec<(f64, f64)> = pairs.iter().filter_map(|(d, r)| r.map(|r| (*d, r))).collect();
    let tail: Vec<(f64, f64)> = feasible
        .iter()
        .copied()
        .filter(|(d, _)| *d >= RATIO_AVERAGE_FROM_KM)
        .collect();
    let used = if tail.is_empty() { feasible } else { tail };
    if used.is_empty() {
        return None;
    }
    let mean = used.iter().map(|(_, r)| r).sum::<f64>() / used.len() as f64;
    Some((mean, used.iter().map(|(d, _)| *d).collect()))
}

/// `K_max` under `numerator` divided by `K_max` under `denominator`, per
/// distance.
pub fn ratio_between(
    modulation: Modulation,
    distances: &[f64],
    template: &ChannelParams,
    zeta: f64,
    numerator: Objective,
    denominator: Objective,
    ev: &Evaluator<'_>,
) -> Result<RatioReport> {
    if distances.is_empty() {
        return domain("distance list is empty");
    }
    let rows: Vec<RatioRow> = distances
        .par_iter()
        .map(|d| {
            let ch = template.with_distance(*d)?;
            let num = optimize_energy(modulation, &ch, zeta, numerator, ev)?;
            let den = optimize_energy(modulation, &ch, zeta, denominator, ev)?;
            let ratio = (num.feasible && den.feasible).then(|| num.k_max / den.k_max);
            if ratio.is_none() {
                log::warn!("ratio at d = {d} km excluded: infeasible optimum");
            }
            Ok(RatioRow {
                distance_km: *d,
                numerator: num,
                denominator: den,
                ratio,
            })
        })
        .collect::<Result<_>>()?;
    let pairs: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.distance_km, r.ratio)).collect();
    let (mean, averaged_over) =
        mean_ratio(&pairs).ok_or_else(|| Error::Numerical("no feasible distance for the ratio".into()))?;
    Ok(RatioReport {
        rows,
        mean,
        averaged_over,
    })
}

/// Mean PAS gain `K_max^(MB) / K_max^(uniform)` on a pure-loss fiber.
pub fn ratio_pas_gain(m: usize, distances: &[f64], zeta: f64, ev: &Evaluator<'_>) -> Result<RatioReport> {
    check_qam(m)?;
    let template = ChannelParams::pure_loss(0.0)?;
    ratio_between(
        Modulation::Qam(m),
        distances,
        &template,
        zeta,
        Objective::MutualInfo,
        Objective::Uniform,
        ev,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmaxResult {
    /// Midpoint of the final bracket; `None` when unbounded or when the rate
    /// is already nonpositive at the shortest distance probed.
    pub d_max: Option<f64>,
    pub bracket: (f64, f64),
    pub unbounded: bool,
}

/// Largest bracket searched for `d_max`, km.
pub const DMAX_SEARCH_LIMIT_KM: f64 = 400.0;
const DMAX_STEP_KM: f64 = 10.0;
const DMAX_SHORTEST_KM: f64 = 0.5;

/// Distance at which the optimized rate reaches zero, to ±1 km.
pub fn find_d_max(
    modulation: Modulation,
    template: &ChannelParams,
    zeta: f64,
    objective: Objective,
    ev: &Evaluator<'_>,
) -> Result<DmaxResult> {
    let k_at = |d: f64| -> Result<f64> {
        let ch = template.with_distance(d)?;
        Ok(optimize_energy(modulation, &ch, zeta, objective, ev)?.k_max)
    };
    let mut lo = None;
    let mut hi = None;
    let mut d = DMAX_STEP_KM;
    while d <= DMAX_SEARCH_LIMIT_KM {
        if k_at(d)? > 0.0 {
            lo = Some(d);
        } else {
            hi = Some(d);
            break;
        }
        d += DMAX_STEP_KM;
    }
    let Some(mut hi) = hi else {
        return Ok(DmaxResult {
            d_max: None,
            bracket: (DMAX_SEARCH_LIMIT_KM, f64::INFINITY),
            unbounded: true,
        });
    };
    let mut lo = match lo {
        Some(l) => l,
        None => {
            if k_at(DMAX_SHORTEST_KM)? <= 0.0 {
                return Ok(DmaxResult {
                    d_max: None,
                    bracket: (0.0, DMAX_SHORTEST_KM),
                    unbounded: false,
                });
            }
            DMAX_SHORTEST_KM
        }
    };
    while hi - lo > 2.0 {
        let mid = 0.5 * (lo + hi);
        if k_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DmaxResult {
        d_max: Some(0.5 * (lo + hi)),
        bracket: (lo, hi),
        unbounded: false,
    })
}
