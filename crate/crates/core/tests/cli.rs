use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cvqkd::classical_info::GridPolicy;
use cvqkd::kgr_optimizer::{optimize_energy, Evaluator, Modulation, Numerics, Objective};
use cvqkd::ChannelParams;

fn cvqkd(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cvqkd"));
    cmd.args(args).env_remove("CVQKD_CACHE_DIR").env("RUST_LOG", "warn");
    if let Some(dir) = cache {
        cmd.env("CVQKD_CACHE_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().to_string()).collect()
}

fn manifest_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .to_string()
}

#[test]
fn optimize_matches_library() {
    let o = cvqkd(
        &[
            "optimize",
            "--modulation",
            "qam:4",
            "--shaping",
            "uniform",
            "--d",
            "100",
            "--zeta",
            "0.95",
            "--set",
            "simpson_points=601",
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(csv.lines().count(), 2);
    let k: f64 = column(&csv, "k_bits")[0].parse().unwrap();

    let numerics = Numerics {
        holevo: cvqkd::holevo::HolevoOptions {
            grid: GridPolicy::with_points(601),
            ..Default::default()
        },
        ..Default::default()
    };
    let ch = ChannelParams::pure_loss(100.0).unwrap();
    let r = optimize_energy(
        Modulation::Qam(4),
        &ch,
        0.95,
        Objective::Uniform,
        &Evaluator::new(numerics),
    )
    .unwrap();
    assert!((k - r.k_max).abs() <= 1e-11 * r.k_max.abs(), "{k} vs {}", r.k_max);
    assert_eq!(column(&csv, "wall_ms")[0], "0");
    assert_eq!(column(&csv, "grid_points")[0], "601");
}

#[test]
fn config_errors_exit_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep\nmodulation = qam:4\nd = 50\nbogus_key = 1\n").unwrap();
    let o = cvqkd(&["optimize", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("run.cfg:4") && e.contains("bogus_key"), "{e}");

    fs::write(&cfg, "d = 50\nzeta = 1.5\n").unwrap();
    let o = cvqkd(&["optimize", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));

    let o = cvqkd(&["optimize", "--d", "50", "--modulation", "qam:3"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = cvqkd(&["optimize", "--d", "50", "--set", "nope"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = cvqkd(&["sweep-energy", "--d", "50"], None);
    assert_eq!(o.status.code(), Some(2), "sweep-energy needs nbar");
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gg.cfg");
    fs::write(&cfg, "d = 10\nnbar = 1, 2\nzeta = 0.9\n").unwrap();
    let o = cvqkd(&["gg02", "--config", cfg.to_str().unwrap(), "--zeta", "0.95"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    assert_eq!(column(&csv, "zeta"), vec!["0.95", "0.95"]);
    assert_eq!(column(&csv, "nbar"), vec!["1", "2"]);
}

#[test]
fn numerical_failure_exits_3() {
    let o = cvqkd(
        &[
            "sweep-energy",
            "--d",
            "5",
            "--nbar",
            "20",
            "--set",
            "entropy_method=fock",
            "--set",
            "cutoff_cap=4",
        ],
        None,
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let e = stderr(&o);
    assert!(e.contains("d=5") && e.contains("nbar=20"), "{e}");
}

#[test]
fn output_is_reproducible_and_manifest_written() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |p: &Path| {
        vec![
            "sweep-energy".to_string(),
            "--d".into(),
            "20,60".into(),
            "--nbar".into(),
            "0.5:1.5:0.5".into(),
            "--set".into(),
            "simpson_points=401".into(),
            "--output".into(),
            p.to_str().unwrap().into(),
        ]
    };
    let run = |p: &Path, extra: &[&str]| {
        let mut v = args(p);
        v.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = v.iter().map(|s| s.as_str()).collect();
        let o = cvqkd(&refs, None);
        assert!(o.status.success(), "{}", stderr(&o));
    };
    run(&a, &[]);
    run(&b, &["--workers", "1"]);
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(!text.contains('\r') && text.ends_with('\n'));
    assert_eq!(column(&text, "d_km"), vec!["20", "20", "20", "60", "60", "60"]);

    let ma = fs::read_to_string(dir.path().join("a.csv.manifest")).unwrap();
    let mb = fs::read_to_string(dir.path().join("b.csv.manifest")).unwrap();
    assert_eq!(manifest_value(&ma, "config_hash"), manifest_value(&mb, "config_hash"));
    assert_eq!(manifest_value(&ma, "rows"), "6");
    assert_eq!(manifest_value(&ma, "version"), env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest_value(&ma, "cache"), "disabled");
}

#[test]
fn cache_hits_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = dir.path().join("r.csv");
    let args = [
        "sweep-energy",
        "--d",
        "40",
        "--nbar",
        "0.7,1.3",
        "--shaping",
        "mb-mutualinfo",
        "--set",
        "simpson_points=401",
        "--output",
        out.to_str().unwrap(),
    ];
    let manifest = dir.path().join("r.csv.manifest");

    let o = cvqkd(&args, Some(&cache));
    assert!(o.status.success(), "{}", stderr(&o));
    let first = fs::read(&out).unwrap();
    let m = fs::read_to_string(&manifest).unwrap();
    let lookups: usize = manifest_value(&m, "cache_lookups").parse().unwrap();
    assert!(lookups > 0);
    assert_eq!(manifest_value(&m, "cache_hits"), "0");

    let o = cvqkd(&args, Some(&cache));
    assert!(o.status.success());
    assert_eq!(fs::read(&out).unwrap(), first);
    let m = fs::read_to_string(&manifest).unwrap();
    assert_eq!(manifest_value(&m, "cache_hits"), lookups.to_string());

    let entries: Vec<_> = fs::read_dir(&cache).unwrap().map(|e| e.unwrap().path()).collect();
    fs::write(&entries[0], "i_ab=zz\n").unwrap();
    let o = cvqkd(&args, Some(&cache));
    assert!(o.status.success());
    assert!(stderr(&o).contains("corrupt cache entry"), "{}", stderr(&o));
    assert_eq!(fs::read(&out).unwrap(), first);
    let m = fs::read_to_string(&manifest).unwrap();
    assert_eq!(manifest_value(&m, "cache_hits"), (lookups - 1).to_string());
    assert!(fs::read_to_string(&entries[0]).unwrap().starts_with("i_ab="));

    let mut no_cache = args.to_vec();
    no_cache.push("--no-cache");
    let o = cvqkd(&no_cache, Some(&cache));
    assert!(o.status.success());
    assert_eq!(fs::read(&out).unwrap(), first);
    let m = fs::read_to_string(&manifest).unwrap();
    assert_eq!(manifest_value(&m, "cache"), "disabled");
    assert_eq!(manifest_value(&m, "cache_lookups"), "0");

    let changed: Vec<&str> = args
        .iter()
        .map(|a| {
            if *a == "simpson_points=401" {
                "simpson_points=403"
            } else {
                a
            }
        })
        .collect();
    let o = cvqkd(&changed, Some(&cache));
    assert!(o.status.success());
    let m = fs::read_to_string(&manifest).unwrap();
    assert_eq!(manifest_value(&m, "cache_hits"), "0");
}

#[test]
fn ratio_summary_row_is_mean_of_rows() {
    let o = cvqkd(
        &[
            "ratio",
            "--modulation",
            "qam:4",
            "--d",
            "80,90",
            "--set",
            "simpson_points=401",
        ],
        None,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = stdout(&o);
    let scen = column(&csv, "scenario");
    assert_eq!(scen, vec!["ratio", "ratio", "ratio", "ratio", "ratio-mean"]);
    let k: Vec<String> = column(&csv, "k_bits");
    let f = |i: usize| k[i].parse::<f64>().unwrap();
    let mean = 0.5 * (f(1) / f(0) + f(3) / f(2));
    assert!((f(4) - mean).abs() < 1e-11, "{} vs {mean}", f(4));
    assert_eq!(
        column(&csv, "shaping")[..2],
        ["uniform".to_string(), "mb-mutualinfo".to_string()]
    );
}

#[test]
fn dmax_without_noise_is_unbounded() {
    let o = cvqkd(&["dmax", "--modulation", "gg02"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "d_km"), vec!["inf"]);
}
