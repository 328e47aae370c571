//! Batch front end: key-value configuration, scenario execution, CSV rows,
//! run manifest, and an on-disk cache of `(I_AB, χ_BE)` evaluations.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::channel::{ChannelParams, DEFAULT_KAPPA_DB_PER_KM};
use crate::error::Error;
use crate::holevo::EntropyMethod;
use crate::kgr_optimizer::{
    find_d_max, gg02_kgr, mean_ratio, optimize_energy, CachedValue, Evaluator, KgrPoint, Modulation, Numerics,
    Objective, PointCache, PointKey,
};

pub const CSV_HEADER: &str = "scenario,modulation,shaping,d_km,eta,epsilon,nbar,nu,beta,delta,i_ab_bits,chi_be_bits,k_bits,zeta,cutoff_used,grid_points,wall_ms";
/// Bumped whenever the column set or its meaning changes.
pub const CSV_SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "CVQKD_CACHE_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    SweepEnergy,
    SweepDistance,
    Optimize,
    Ratio,
    Dmax,
    Gg02,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SweepEnergy => "sweep-energy",
            Self::SweepDistance => "sweep-distance",
            Self::Optimize => "optimize",
            Self::Ratio => "ratio",
            Self::Dmax => "dmax",
            Self::Gg02 => "gg02",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::SweepEnergy,
            Self::SweepDistance,
            Self::Optimize,
            Self::Ratio,
            Self::Dmax,
            Self::Gg02,
        ]
        .into_iter()
        .find(|x| x.name() == s.trim())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub modulation: Modulation,
    pub shaping: Objective,
    pub zeta: f64,
    pub epsilon: f64,
    pub kappa: f64,
    pub distances: Vec<f64>,
    pub nbars: Vec<f64>,
    pub numerics: Numerics,
    pub output: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub workers: Option<usize>,
    pub use_cache: bool,
    /// Record wall-clock times; off by default so reruns are byte-identical.
    pub timings: bool,
}

impl RunConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            modulation: if scenario == Scenario::Gg02 {
                Modulation::Gg02
            } else {
                Modulation::Qam(4)
            },
            shaping: if scenario == Scenario::Ratio {
                Objective::MutualInfo
            } else {
                Objective::Uniform
            },
            zeta: 0.95,
            epsilon: 0.0,
            kappa: DEFAULT_KAPPA_DB_PER_KM,
            distances: Vec::new(),
            nbars: Vec::new(),
            numerics: Numerics::default(),
            output: None,
            manifest: None,
            workers: None,
            use_cache: true,
            timings: false,
        }
    }

    /// Sets one key. Keys match the long flag names with `-` or `_`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        let key = key.trim().replace('-', "_");
        let n = &mut self.numerics;
        match key.as_str() {
            "scenario" => {
                let s = Scenario::parse(v).ok_or_else(|| format!("unknown scenario '{v}'"))?;
                if s != self.scenario {
                    return Err(format!(
                        "scenario '{v}' conflicts with subcommand '{}'",
                        self.scenario.name()
                    ));
                }
            }
            "modulation" => self.modulation = v.parse().map_err(|e: Error| e.to_string())?,
            "shaping" => self.shaping = v.parse().map_err(|e: Error| e.to_string())?,
            "zeta" => self.zeta = parse_f64(v)?,
            "epsilon" => self.epsilon = parse_f64(v)?,
            "kappa" => self.kappa = parse_f64(v)?,
            "d" | "distance" | "distances" => self.distances = parse_grid(v)?,
            "nbar" => self.nbars = parse_grid(v)?,
            "simpson_points" => n.holevo.grid.points = parse_usize(v)?,
            "range_sigmas" => n.holevo.grid.range_sigmas = parse_f64(v)?,
            "cutoff_cap" => n.holevo.cutoff_cap = parse_usize(v)?,
            "entropy_method" => {
                n.holevo.method = match v {
                    "gram" => EntropyMethod::Gram,
                    "fock" => EntropyMethod::Fock,
                    _ => return Err(format!("entropy_method must be gram or fock, got '{v}'")),
                }
            }
            "node_drop" => n.holevo.node_drop_rel = parse_f64(v)?,
            "tail_tol" => n.holevo.tail_tol = parse_f64(v)?,
            "nu_hi" => n.nu_hi = parse_f64(v)?,
            "nu_tol" => n.nu_tol = parse_f64(v)?,
            "nbar_lo" => n.nbar_lo = parse_f64(v)?,
            "nbar_hi" => n.nbar_hi = parse_f64(v)?,
            "nbar_points" => n.nbar_points = parse_usize(v)?,
            "nbar_log_tol" => n.log_nbar_tol = parse_f64(v)?,
            "output" => self.output = Some(PathBuf::from(v)),
            "manifest" => self.manifest = Some(PathBuf::from(v)),
            "workers" => self.workers = Some(parse_usize(v)?),
            "cache" => self.use_cache = parse_bool(v)?,
            "timings" => self.timings = parse_bool(v)?,
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        let bad = |m: &str| Err(m.to_string());
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return bad("zeta must lie in (0, 1]");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be finite and nonnegative");
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa must be positive");
        }
        if self.distances.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return bad("distances must be finite and nonnegative");
        }
        if self.nbars.iter().any(|n| !(*n > 0.0 && n.is_finite())) {
            return bad("nbar values must be positive");
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1");
        }
        self.numerics.validate().map_err(|e| e.to_string())?;
        if self.numerics.holevo.grid.points > 200_001 {
            return bad("simpson_points above 200001");
        }
        if self.numerics.holevo.cutoff_cap > 200 {
            return bad("cutoff_cap above 200");
        }
        let needs_d = self.scenario != Scenario::Dmax;
        if needs_d && self.distances.is_empty() {
            return bad("no distances given (key 'd')");
        }
        if self.scenario == Scenario::SweepEnergy && self.nbars.is_empty() {
            return bad("sweep-energy needs an nbar grid (key 'nbar')");
        }
        if self.epsilon > 0.0 && self.distances.contains(&0.0) {
            return bad("distance 0 with nonzero epsilon");
        }
        match (self.scenario, self.modulation, self.shaping) {
            (Scenario::Gg02, Modulation::Gg02, _) => {}
            (Scenario::Gg02, _, _) => return bad("gg02 scenario needs modulation gg02"),
            (_, Modulation::Qam(_), _) => {}
            (_, _, Objective::Uniform) if self.scenario != Scenario::Ratio => {}
            _ => return bad("shaping other than uniform needs a QAM modulation"),
        }
        if self.scenario == Scenario::Ratio && self.shaping == Objective::Uniform {
            return bad("ratio needs a non-uniform shaping objective");
        }
        if self.scenario == Scenario::Dmax && self.epsilon == 0.0 {
            log::warn!("dmax with zero excess noise: expect an unbounded result");
        }
        if (self.modulation == Modulation::Gg02) && self.epsilon > 0.0 {
            return bad("gg02 closed forms need epsilon = 0");
        }
        Ok(())
    }

    /// Canonical description of everything that affects the CSV body.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "scenario={};modulation={};shaping={};zeta={:016x};epsilon={:016x};kappa={:016x};timings={}",
            self.scenario.name(),
            self.modulation,
            self.shaping,
            self.zeta.to_bits(),
            self.epsilon.to_bits(),
            self.kappa.to_bits(),
            self.timings
        );
        s.push_str(";d=");
        for d in &self.distances {
            let _ = write!(s, "{:016x},", d.to_bits());
        }
        s.push_str(";nbar=");
        for n in &self.nbars {
            let _ = write!(s, "{:016x},", n.to_bits());
        }
        s.push(';');
        s.push_str(&self.numerics.describe());
        s
    }

    pub fn hash(&self) -> String {
        hex_digest(self.describe().as_bytes())
    }

    fn channel(&self, d: f64) -> Result<ChannelParams, Error> {
        ChannelParams::from_distance(d, self.kappa, self.epsilon)
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    v.parse::<f64>().map_err(|_| format!("expected a number, got '{v}'"))
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.parse::<usize>()
        .map_err(|_| format!("expected a nonnegative integer, got '{v}'"))
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got '{v}'")),
    }
}

/// `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_grid(v: &str) -> Result<Vec<f64>, String> {
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("range must be start:stop:step, got '{v}'"));
        }
        let (a, b, h) = (parse_f64(parts[0])?, parse_f64(parts[1])?, parse_f64(parts[2])?);
        if !(h > 0.0) || b < a {
            return Err(format!("range '{v}' needs step > 0 and stop >= start"));
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        if n > 100_000 {
            return Err(format!("range '{v}' has too many points"));
        }
        return Ok((0..=n).map(|i| a + h * i as f64).collect());
    }
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_f64(s.trim()))
        .collect()
}

/// `(line number, key, value)`.
pub type ConfigEntry = (usize, String, String);

/// `key = value` lines; `#` starts a comment. Errors carry the line number.
pub fn parse_config_text(text: &str) -> Result<Vec<ConfigEntry>, (usize, String)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| (i + 1, format!("expected 'key = value', got '{line}'")))?;
        if k.trim().is_empty() {
            return Err((i + 1, "empty key".to_string()));
        }
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Builds a configuration from an optional file followed by overrides.
pub fn build_config(
    scenario: Scenario,
    file: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::new(scenario);
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let entries = parse_config_text(&text).map_err(|(l, m)| format!("{}:{l}: {m}", path.display()))?;
        for (line, k, v) in entries {
            cfg.apply(&k, &v)
                .map_err(|m| format!("{}:{line}: {m}", path.display()))?;
        }
    }
    for (k, v) in overrides {
        cfg.apply(k, v).map_err(|m| format!("--{k}: {m}"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `%.12g`: 12 significant digits, shortest of fixed or exponent form, no
/// trailing zeros. NaN is written as an empty field.
pub fn format_g12(x: f64) -> String {
    if x.is_nan() {
        return String::new();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        strip_zeros(format!("{x:.decimals$}"))
    } else {
        let m = strip_zeros(mant.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub modulation: String,
    pub shaping: String,
    pub d_km: f64,
    pub eta: f64,
    pub epsilon: f64,
    pub nbar: f64,
    pub nu: f64,
    pub beta: f64,
    pub delta: f64,
    pub i_ab_bits: f64,
    pub chi_be_bits: f64,
    pub k_bits: f64,
    pub zeta: f64,
    pub cutoff_used: Option<usize>,
    pub grid_points: Option<usize>,
    pub wall_ms: u64,
}

impl ResultRow {
    fn from_point(scenario: &str, modulation: Modulation, shaping: Objective, p: &KgrPoint, wall_ms: u64) -> Self {
        Self {
            scenario: scenario.to_string(),
            modulation: modulation.to_string(),
            shaping: shaping.to_string(),
            d_km: p.channel.distance_km(),
            eta: p.channel.eta(),
            epsilon: p.channel.epsilon(),
            nbar: p.nbar,
            nu: p.nu,
            beta: p.beta,
            delta: p.delta,
            i_ab_bits: p.i_ab,
            chi_be_bits: p.chi_be,
            k_bits: p.k,
            zeta: p.zeta,
            cutoff_used: Some(p.cutoff_used),
            grid_points: Some(p.grid_points),
            wall_ms,
        }
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let f = [
            self.d_km,
            self.eta,
            self.epsilon,
            self.nbar,
            self.nu,
            self.beta,
            self.delta,
            self.i_ab_bits,
            self.chi_be_bits,
            self.k_bits,
            self.zeta,
        ]
        .map(format_g12);
        format!(
            "{},{},{},{},{},{},{}",
            self.scenario,
            self.modulation,
            self.shaping,
            f.join(","),
            opt(self.cutoff_used),
            opt(self.grid_points),
            self.wall_ms
        )
    }
}

pub fn cache_key(key: &PointKey) -> String {
    hex_digest(format!("cvqkd-cache-v1\n{}", key.describe()).as_bytes())
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// One file per point under a directory; values stored as `f64` bit
/// patterns.
pub struct FileCache {
    dir: PathBuf,
}

impl FileCache {
    pub fn new(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    fn path(&self, key: &PointKey) -> PathBuf {
        self.dir.join(cache_key(key))
    }
}

fn decode_entry(text: &str) -> Option<CachedValue> {
    let mut fields = std::collections::HashMap::new();
    for line in text.lines() {
        let (k, v) = line.split_once('=')?;
        fields.insert(k, v);
    }
    let bits = |k: &str| u64::from_str_radix(fields.get(k)?, 16).ok().map(f64::from_bits);
    let int = |k: &str| fields.get(k)?.parse::<usize>().ok();
    let v = CachedValue {
        i_ab: bits("i_ab")?,
        chi_be: bits("chi_be")?,
        cutoff_used: int("cutoff_used")?,
        grid_points: int("grid_points")?,
    };
    (v.i_ab.is_finite() && v.chi_be.is_finite()).then_some(v)
}

impl PointCache for FileCache {
    fn lookup(&self, key: &PointKey) -> Option<CachedValue> {
        let path = self.path(key);
        let text = fs::read_to_string(&path).ok()?;
        let v = decode_entry(&text);
        if v.is_none() {
            log::warn!("corrupt cache entry {}; recomputing", path.display());
        }
        v
    }

    fn store(&self, key: &PointKey, value: &CachedValue) {
        let path = self.path(key);
        let body = format!(
            "i_ab={:016x}\nchi_be={:016x}\ncutoff_used={}\ngrid_points={}\n",
            value.i_ab.to_bits(),
            value.chi_be.to_bits(),
            value.cutoff_used,
            value.grid_points
        );
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let res = fs::write(&tmp, body).and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = res {
            log::warn!("could not write cache entry {}: {e}", path.display());
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointStats {
    pub label: String,
    pub lookups: usize,
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub points: Vec<PointStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub point: String,
    pub error: Error,
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "numerical failure at {}: {}", self.point, self.error)
    }
}

enum Task {
    Fixed { d: f64, nbar: f64 },
    Optimum { d: f64 },
    RatioAt { d: f64 },
    Dmax,
}

impl Task {
    fn label(&self, cfg: &RunConfig) -> String {
        let head = format!("{} {} {}", cfg.scenario.name(), cfg.modulation, cfg.shaping);
        match self {
            Task::Fixed { d, nbar } => format!("{head} d={d} nbar={nbar}"),
            Task::Optimum { d } | Task::RatioAt { d } => format!("{head} d={d}"),
            Task::Dmax => format!("{head} epsilon={}", cfg.epsilon),
        }
    }
}

fn tasks(cfg: &RunConfig) -> Vec<Task> {
    match cfg.scenario {
        Scenario::SweepEnergy => cfg
            .distances
            .iter()
            .flat_map(|d| cfg.nbars.iter().map(move |n| Task::Fixed { d: *d, nbar: *n }))
            .collect(),
        Scenario::Gg02 if !cfg.nbars.is_empty() => cfg
            .distances
            .iter()
            .flat_map(|d| cfg.nbars.iter().map(move |n| Task::Fixed { d: *d, nbar: *n }))
            .collect(),
        Scenario::SweepDistance | Scenario::Optimize | Scenario::Gg02 => {
            cfg.distances.iter().map(|d| Task::Optimum { d: *d }).collect()
        }
        Scenario::Ratio => cfg.distances.iter().map(|d| Task::RatioAt { d: *d }).collect(),
        Scenario::Dmax => vec![Task::Dmax],
    }
}

fn run_task(cfg: &RunConfig, task: &Task, ev: &Evaluator<'_>) -> Result<(Vec<ResultRow>, Option<f64>), Error> {
    let start = Instant::now();
    let scen = cfg.scenario.name();
    let wall = |s: &Instant| if cfg.timings { s.elapsed().as_millis() as u64 } else { 0 };
    match task {
        Task::Fixed { d, nbar } => {
            let ch = cfg.channel(*d)?;
            let p = if cfg.modulation == Modulation::Gg02 {
                gg02_kgr(*nbar, &ch, cfg.zeta)?
            } else {
                ev.best_at_energy(cfg.modulation, cfg.shaping, &ch, *nbar, cfg.zeta)?
            };
            Ok((
                vec![ResultRow::from_point(
                    scen,
                    cfg.modulation,
                    cfg.shaping,
                    &p,
                    wall(&start),
                )],
                None,
            ))
        }
        Task::Optimum { d } => {
            let ch = cfg.channel(*d)?;
            let r = optimize_energy(cfg.modulation, &ch, cfg.zeta, cfg.shaping, ev)?;
            Ok((
                vec![ResultRow::from_point(
                    scen,
                    cfg.modulation,
                    cfg.shaping,
                    &r.point,
                    wall(&start),
                )],
                None,
            ))
        }
        Task::RatioAt { d } => {
            let ch = cfg.channel(*d)?;
            let num = optimize_energy(cfg.modulation, &ch, cfg.zeta, cfg.shaping, ev)?;
            let den = optimize_energy(cfg.modulation, &ch, cfg.zeta, Objective::Uniform, ev)?;
            let ratio = (num.feasible && den.feasible).then(|| num.k_max / den.k_max);
            if ratio.is_none() {
                log::warn!("d = {d} km excluded from the mean ratio: infeasible optimum");
            }
            let ms = wall(&start);
            Ok((
                vec![
                    ResultRow::from_point(scen, cfg.modulation, Objective::Uniform, &den.point, ms),
                    ResultRow::from_point(scen, cfg.modulation, cfg.shaping, &num.point, ms),
                ],
                ratio,
            ))
        }
        Task::Dmax => {
            let template = ChannelParams::from_distance(1.0, cfg.kappa, cfg.epsilon)?;
            let r = find_d_max(cfg.modulation, &template, cfg.zeta, cfg.shaping, ev)?;
            let mut row = match r.d_max {
                Some(d) => {
                    let opt = optimize_energy(cfg.modulation, &cfg.channel(d)?, cfg.zeta, cfg.shaping, ev)?;
                    ResultRow::from_point(scen, cfg.modulation, cfg.shaping, &opt.point, 0)
                }
                None => empty_row(cfg, scen, if r.unbounded { f64::INFINITY } else { f64::NAN }),
            };
            row.wall_ms = wall(&start);
            Ok((vec![row], None))
        }
    }
}

fn empty_row(cfg: &RunConfig, scenario: &str, d_km: f64) -> ResultRow {
    ResultRow {
        scenario: scenario.to_string(),
        modulation: cfg.modulation.to_string(),
        shaping: cfg.shaping.to_string(),
        d_km,
        eta: f64::NAN,
        epsilon: cfg.epsilon,
        nbar: f64::NAN,
        nu: f64::NAN,
        beta: f64::NAN,
        delta: f64::NAN,
        i_ab_bits: f64::NAN,
        chi_be_bits: f64::NAN,
        k_bits: f64::NAN,
        zeta: cfg.zeta,
        cutoff_used: None,
        grid_points: None,
        wall_ms: 0,
    }
}

/// Runs all points of a validated configuration; rows follow grid order.
pub fn execute(cfg: &RunConfig, cache: Option<&dyn PointCache>) -> Result<RunOutput, RunError> {
    let tasks = tasks(cfg);
    let body = || {
        tasks
            .par_iter()
            .map(|t| {
                let ev = match cache {
                    Some(c) if cfg.use_cache => Evaluator::with_cache(cfg.numerics, c),
                    _ => Evaluator::new(cfg.numerics),
                };
                let (rows, ratio) = run_task(cfg, t, &ev).map_err(|error| RunError {
                    point: t.label(cfg),
                    error,
                })?;
                let (lookups, hits) = ev.cache_stats();
                Ok((
                    rows,
                    ratio,
                    PointStats {
                        label: t.label(cfg),
                        lookups,
                        hits,
                    },
                ))
            })
            .collect::<Result<Vec<_>, RunError>>()
    };
    let results = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError {
                point: "thread pool".into(),
                error: Error::Numerical(e.to_string()),
            })?
            .install(body),
        None => body(),
    }?;

    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut ratios = Vec::new();
    for (task, (r, ratio, stats)) in tasks.iter().zip(results) {
        rows.extend(r);
        points.push(stats);
        if let Task::RatioAt { d } = task {
            ratios.push((*d, ratio));
        }
    }
    if cfg.scenario == Scenario::Ratio {
        let (mean, _) = mean_ratio(&ratios).ok_or_else(|| RunError {
            point: "ratio summary".into(),
            error: Error::Numerical("no feasible distance for the ratio".into()),
        })?;
        let mut row = empty_row(cfg, "ratio-mean", f64::NAN);
        row.epsilon = cfg.epsilon;
        row.k_bits = mean;
        rows.push(row);
    }
    Ok(RunOutput { rows, points })
}

pub fn csv_text(rows: &[ResultRow]) -> String {
    let mut s = String::with_capacity(128 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv_line());
        s.push('\n');
    }
    s
}

pub fn manifest_text(cfg: &RunConfig, out: &RunOutput, cache_dir: Option<&Path>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tool = cvqkd");
    let _ = writeln!(s, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "csv_schema = {CSV_SCHEMA_VERSION}");
    let _ = writeln!(s, "config_hash = {}", cfg.hash());
    let _ = writeln!(s, "scenario = {}", cfg.scenario.name());
    let _ = writeln!(s, "rows = {}", out.rows.len());
    let _ = writeln!(
        s,
        "cache = {}",
        match (cache_dir, cfg.use_cache) {
            (Some(d), true) => d.display().to_string(),
            _ => "disabled".into(),
        }
    );
    let (mut lk, mut ht) = (0, 0);
    for (i, p) in out.points.iter().enumerate() {
        lk += p.lookups;
        ht += p.hits;
        let _ = writeln!(s, "point.{i} = {} | lookups={} hits={}", p.label, p.lookups, p.hits);
    }
    let _ = writeln!(s, "cache_lookups = {lk}");
    let _ = writeln!(s, "cache_hits = {ht}");
    s
}

/// Full run: cache from the environment, CSV to `output` (or stdout),
/// manifest next to it. Returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let cache_dir = std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from);
    let cache = match (&cache_dir, cfg.use_cache) {
        (Some(dir), true) => match FileCache::new(dir) {
            Ok(c) => Some(c),
            Err(e) => {
                log::warn!("cache directory {} unusable: {e}", dir.display());
                None
            }
        },
        _ => None,
    };
    let out = match execute(cfg, cache.as_ref().map(|c| c as &dyn PointCache)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let csv = csv_text(&out.rows);
    let manifest = manifest_text(cfg, &out, cache.as_ref().map(|c| c.dir.as_path()));
    let write = |path: &Path, text: &str| fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()));
    let result = match &cfg.output {
        Some(path) => write(path, &csv).and_then(|_| {
            let m = cfg.manifest.clone().unwrap_or_else(|| manifest_path_for(path));
            write(&m, &manifest)
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            let r = stdout.write_all(csv.as_bytes()).map_err(|e| e.to_string());
            r.and_then(|_| match &cfg.manifest {
                Some(m) => write(m, &manifest),
                None => Ok(()),
            })
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_NUMERICAL
        }
    }
}

pub fn manifest_path_for(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest");
    csv.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn g12_format() {
        assert_eq!(format_g12(0.0), "0");
        assert_eq!(format_g12(1.0), "1");
        assert_eq!(format_g12(100.0), "100");
        assert_eq!(format_g12(0.1), "0.1");
        assert_eq!(format_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_g12(2.0 / 3.0 * 1e-5), "6.66666666667e-06");
        assert_eq!(format_g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(format_g12(-0.000123), "-0.000123");
        assert_eq!(format_g12(999999999999.9), "1e+12");
        assert_eq!(format_g12(f64::NAN), "");
        assert_eq!(format_g12(f64::INFINITY), "inf");
        assert_eq!(format_g12(0.95), "0.95");
        assert_eq!(format_g12(1e-300), "1e-300");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("80:100:5").unwrap(), vec![80.0, 85.0, 90.0, 95.0, 100.0]);
        assert_eq!(parse_grid("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn config_text_errors_carry_lines() {
        let ok = parse_config_text("# c\nzeta = 0.9\n\nd = 10,20 # km\n").unwrap();
        assert_eq!(
            ok,
            vec![(2, "zeta".into(), "0.9".into()), (4, "d".into(), "10,20".into())]
        );
        assert_eq!(parse_config_text("zeta 0.9").unwrap_err().0, 1);
        let mut c = RunConfig::new(Scenario::Optimize);
        assert!(c.apply("bogus", "1").is_err());
        assert!(c.apply("zeta", "x").is_err());
        c.apply("simpson-points", "601").unwrap();
        assert_eq!(c.numerics.holevo.grid.points, 601);
        assert!(c.apply("scenario", "ratio").is_err());
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new(Scenario::Optimize);
        assert!(c.validate().is_err());
        c.distances = vec![100.0];
        c.validate().unwrap();
        c.modulation = Modulation::Psk(16);
        c.shaping = Objective::MutualInfo;
        assert!(c.validate().is_err());
        let mut g = RunConfig::new(Scenario::Gg02);
        g.distances = vec![10.0];
        g.validate().unwrap();
        g.epsilon = 0.01;
        assert!(g.validate().is_err());
        let mut e = RunConfig::new(Scenario::Optimize);
        e.distances = vec![0.0];
        e.epsilon = 0.02;
        assert!(e.validate().is_err());
    }

    #[test]
    fn hash_tracks_numerics() {
        let mut a = RunConfig::new(Scenario::Optimize);
        a.distances = vec![50.0];
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.numerics.holevo.grid.points = 601;
        assert_ne!(a.hash(), b.hash());
        a.output = Some("x.csv".into());
        assert_eq!(
            a.hash(),
            RunConfig {
                output: None,
                ..a.clone()
            }
            .hash()
        );
    }

    #[test]
    fn cache_entry_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FileCache::new(dir.path()).unwrap();
        let key = PointKey {
            modulation: Modulation::Qam(4),
            objective: Objective::Uniform,
            channel: ChannelParams::pure_loss(10.0).unwrap(),
            nbar: 1.0,
            nu: 0.0,
            numerics: Numerics::default(),
        };
        assert!(cache.lookup(&key).is_none());
        let v = CachedValue {
            i_ab: 0.1 + 0.2,
            chi_be: 1.0 / 3.0,
            cutoff_used: 1,
            grid_points: 1201,
        };
        cache.store(&key, &v);
        assert_eq!(cache.lookup(&key), Some(v));
        fs::write(cache.path(&key), "garbage").unwrap();
        assert!(cache.lookup(&key).is_none());
        let other = PointKey { nu: 1e-300, ..key };
        assert_ne!(cache_key(&key), cache_key(&other));
    }

    #[test]
    fn gg02_rows_match_closed_form() {
        let mut c = RunConfig::new(Scenario::Gg02);
        c.distances = vec![100.0];
        c.nbars = vec![0.5, 1.0, 2.0];
        c.validate().unwrap();
        let out = execute(&c, None).unwrap();
        assert_eq!(out.rows.len(), 3);
        for (row, nbar) in out.rows.iter().zip([0.5, 1.0, 2.0]) {
            let p = gg02_kgr(nbar, &ChannelParams::pure_loss(100.0).unwrap(), 0.95).unwrap();
            assert_eq!(row.k_bits, p.k);
            assert_abs_diff_eq!(row.i_ab_bits, 0.5 * (1.0 + 2.0 * 0.01 * nbar).log2(), epsilon = 1e-14);
        }
        let csv = csv_text(&out.rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
        assert!(!csv.contains('\r'));
    }
}
