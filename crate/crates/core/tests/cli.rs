use std::path::Path;
use std::process::{Command, Output};

fn kvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kvar"))
        .args(args)
        .env_remove("KVAR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Every column but the trailing `elapsed_seconds`.
fn without_elapsed(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn estimate_uniform() {
    let o = kvar(&["estimate", "--family", "uniform01", "--k", "10", "--n", "100000", "--seed", "7"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,d,n,estimate,stderr,mcdiarmid_radius"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&fields[..3], ["10", "1", "100000"]);
    let (est, se): (f64, f64) = (fields[3].parse().unwrap(), fields[4].parse().unwrap());
    assert!((est - 10.0 / 66.0).abs() < 3.0 * se, "{est} ± {se}");
    assert_eq!(fields[5], "");
}

#[test]
fn estimate_two_point_with_radius() {
    let o = kvar(&["estimate", "--family", "two-point", "--dim", "4", "--k", "2", "--n", "100000", "--seed", "7", "--radius", "0.5"]);
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
    assert!((f[3] - 0.2651650429449553).abs() < 3.0 * f[4], "{line}");
    assert!(f[5] > 0.0);
}

#[test]
fn empty_dataset_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    let o = kvar(&["estimate", "--dataset", path.to_str().unwrap(), "--k", "5", "--n", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn parameter_errors_exit_2() {
    for args in [
        &["estimate", "--family", "weibull", "--shape=-1", "--k", "2", "--n", "2"][..],
        &["estimate", "--family", "uniform01", "--k", "0", "--n", "2"],
        &["closed-form", "weibull-inf", "--alpha", "-2"],
        &["closed-form", "tukey-inf", "--lambda", "-1"],
        &["closed-form", "integral-limit", "--family", "uniform01", "--nodes", "10"],
        &["sweep", "family", "--family", "uniform01", "--kgrid", "8:4:x2", "--n", "3"],
        &["bogus"],
    ] {
        let o = kvar(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn closed_forms() {
    let cases: &[(&[&str], &str)] = &[
        (&["uniform", "--k", "10"], "0.15151515151515152"),
        (&["weibull-inf", "--alpha", "2"], "infinite"),
        (&["tukey-inf", "--lambda", "0"], "1.0"),
        (&["exponential", "--k", "3", "--rate", "2"], "0.4583333333333333"),
        (&["two-point", "--k", "1", "--d", "1"], "0.25"),
        (&["unit-square-inf"], "0.15915494309189535"),
        (&["integral-limit", "--family", "weibull", "--shape", "1.5"], "infinite"),
    ];
    for (args, want) in cases {
        let mut full = vec!["closed-form"];
        full.extend_from_slice(args);
        let o = kvar(&full);
        assert!(o.status.success(), "{full:?}");
        assert_eq!(stdout(&o).trim(), *want, "{full:?}");
    }
}

#[test]
fn sweep_writes_curves_fit_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let o = kvar(&[
        "sweep", "gmm", "--d", "5", "--x", "0,0.95", "--kgrid", "1:16:x2", "--n", "50", "--seed", "1", "--fit", "--kmin", "2",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let curve = read(out.join("gmm_x0.95.csv"));
    assert!(curve.starts_with("label,k,estimate,stderr,n,elapsed_seconds\n"));
    assert_eq!(curve.lines().count(), 6);
    assert!(stdout(&o).starts_with("label,slope,intercept,r_squared"));
    assert_eq!(stdout(&o), read(out.join("fits.csv")));
    let manifest: serde_json::Value = serde_json::from_str(&read(out.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["master_seed"], 1);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = kvar(&[
        "sweep", "family", "--family", "uniform01", "--kgrid", "1:2", "--n", "3", "--out-dir",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn dataset_sweep_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("digits.csv");
    let rows: String = (0..40).map(|i| format!("{},{},{}\n", i % 7, (i * 3) % 5, i % 2)).collect();
    std::fs::write(&data, format!("a,b,c\n{rows}")).unwrap();
    let first = dir.path().join("first");
    let o = kvar(&[
        "sweep", "dataset", "--path", data.to_str().unwrap(), "--kgrid", "2:8:x2", "--n", "30", "--seed", "4",
        "--out-dir", first.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let second = dir.path().join("second");
    let o = kvar(&["replay", first.join("manifest.json").to_str().unwrap(), "--out-dir", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        without_elapsed(&read(first.join("digits.csv"))),
        without_elapsed(&read(second.join("digits.csv")))
    );
}

#[test]
fn estimate_out_file_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("est.csv");
    let o = kvar(&["estimate", "--family", "gmm", "--x", "0.5", "--dim", "3", "--k", "16", "--n", "40", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
    let manifest = dir.path().join("est.manifest.json");
    let again = dir.path().join("again.csv");
    let o = kvar(&["replay", manifest.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&out), read(&again));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nfamily = exponential\nrate = 2\nk = 3\nn = 1000\nseed = 5\n").unwrap();
    let from_file = kvar(&["estimate", "--config", cfg.to_str().unwrap()]);
    let explicit = kvar(&["estimate", "--family", "exponential", "--rate", "2", "--k", "3", "--n", "1000", "--seed", "5"]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&explicit));
    let overridden = kvar(&["estimate", "--config", cfg.to_str().unwrap(), "--k", "4"]);
    assert!(stdout(&overridden).lines().nth(1).unwrap().starts_with("4,"));
}

#[test]
fn threads_flag_and_env_do_not_change_output() {
    let args = ["estimate", "--family", "uniform-cube", "--dim", "2", "--k", "30", "--n", "64", "--seed", "3"];
    let base = stdout(&kvar(&args));
    for t in ["1", "3", "8"] {
        let mut with = args.to_vec();
        with.extend(["--threads", t]);
        assert_eq!(stdout(&kvar(&with)), base);
        let o = Command::new(env!("CARGO_BIN_EXE_kvar")).args(args).env("KVAR_THREADS", t).output().unwrap();
        assert_eq!(stdout(&o), base);
    }
    let o = Command::new(env!("CARGO_BIN_EXE_kvar")).args(args).env("KVAR_THREADS", "many").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
