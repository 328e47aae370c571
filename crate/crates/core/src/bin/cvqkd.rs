use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cvqkd::cli_runner::{build_config, run, Scenario, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "cvqkd",
    version,
    about = "Key-rate sweeps for shaped discrete-modulation CV-QKD"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// K at fixed (d, nbar) grid points, nu optimized per point.
    SweepEnergy(Common),
    /// K_max over a distance grid.
    SweepDistance(Common),
    /// K_max at the given distance(s).
    Optimize(Common),
    /// Shaped over uniform K_max per distance plus the mean ratio.
    Ratio(Common),
    /// Distance at which K_max reaches zero.
    Dmax(Common),
    /// Gaussian-modulation closed forms.
    Gg02(Common),
}

#[derive(Args)]
struct Common {
    /// Key-value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// qam:M, psk:N or gg02.
    #[arg(long)]
    modulation: Option<String>,
    /// uniform, mb-mutualinfo or mb-kgr.
    #[arg(long)]
    shaping: Option<String>,
    /// Distances in km: `a,b,c` or `start:stop:step`.
    #[arg(long)]
    d: Option<String>,
    /// Mean photon numbers, same syntax as --d.
    #[arg(long)]
    nbar: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Attenuation in dB/km.
    #[arg(long)]
    kappa: Option<String>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    manifest: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    /// Ignore CVQKD_CACHE_DIR.
    #[arg(long)]
    no_cache: bool,
    /// Fill wall_ms (rows are then no longer reproducible byte for byte).
    #[arg(long)]
    timings: bool,
    /// Any configuration key, e.g. --set simpson_points=2401.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (scenario, c) = match cli.command {
        Command::SweepEnergy(c) => (Scenario::SweepEnergy, c),
        Command::SweepDistance(c) => (Scenario::SweepDistance, c),
        Command::Optimize(c) => (Scenario::Optimize, c),
        Command::Ratio(c) => (Scenario::Ratio, c),
        Command::Dmax(c) => (Scenario::Dmax, c),
        Command::Gg02(c) => (Scenario::Gg02, c),
    };
    let mut overrides = Vec::new();
    let named = [
        ("modulation", c.modulation),
        ("shaping", c.shaping),
        ("d", c.d),
        ("nbar", c.nbar),
        ("zeta", c.zeta),
        ("epsilon", c.epsilon),
        ("kappa", c.kappa),
        ("output", c.output),
        ("manifest", c.manifest),
        ("workers", c.workers),
    ];
    for (k, v) in named {
        if let Some(v) = v {
            overrides.push((k.to_string(), v));
        }
    }
    for kv in &c.set {
        match kv.split_once('=') {
            Some((k, v)) => overrides.push((k.trim().to_string(), v.trim().to_string())),
            None => {
                eprintln!("error: --set expects KEY=VALUE, got '{kv}'");
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
    }
    if c.no_cache {
        overrides.push(("cache".into(), "off".into()));
    }
    if c.timings {
        overrides.push(("timings".into(), "on".into()));
    }
    let cfg = match build_config(scenario, c.config.as_deref(), &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    ExitCode::from(run(&cfg) as u8)
}
