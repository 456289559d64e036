use std::process::{Command, Output};

fn ssmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssmlab")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn missing_seed_is_a_usage_error() {
    for cmd in ["converge", "metric", "stagewise"] {
        let out = ssmlab(&[cmd]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
    }
    let out = ssmlab(&["gen-dynsys", "--kind", "vdp"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(ssmlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        ssmlab(&["converge", "--seed", "1", "--pairs", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        ssmlab(&["stagewise", "--seed", "1", "--strides", "4,2"]).status.code(),
        Some(1)
    );
    assert_eq!(
        ssmlab(&["gen-dynsys", "--seed", "1", "--kind", "lorenz"]).status.code(),
        Some(1)
    );
    assert_eq!(ssmlab(&["help"]).status.code(), Some(0));
}

#[test]
fn converge_row_count_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    let out = ssmlab(&[
        "converge",
        "--seed",
        "3",
        "--pairs",
        "2",
        "--scales",
        "1,4",
        "--tau-max-exp",
        "6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("pair_id,"));
    // 2 pairs x 2 flavors x 2 methods x 5 step sizes x 2 scales
    assert_eq!(lines.count(), 80);
    let summary = stdout(&out);
    assert!(summary.contains("S4") && summary.contains("S6"));
}

#[test]
fn gen_dynsys_emits_one_row_per_grid_point() {
    let out = ssmlab(&[
        "gen-dynsys",
        "--seed",
        "1",
        "--kind",
        "duffing",
        "--count",
        "3",
        "--horizon",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("sample_id,kind,param_json,t,x"));
    assert_eq!(text.lines().count(), 1 + 3 * 101);
}

#[test]
fn ou_without_noise_decays_exponentially() {
    let out = ssmlab(&[
        "gen-dynsys",
        "--seed",
        "5",
        "--kind",
        "ou",
        "--horizon",
        "3",
        "--param",
        "sigma=0",
        "--param",
        "theta=0.7",
        "--param",
        "x0=2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let t: f64 = cols[3].parse().unwrap();
        let x: f64 = cols[4].parse().unwrap();
        assert!((x - 2.0 * (-0.7 * t).exp()).abs() < 1e-6, "t={t} x={x}");
    }
}

#[test]
fn metric_with_single_lag() {
    let out = ssmlab(&[
        "metric", "--seed", "4", "--count", "4", "--lags", "1", "--etas", "0,0.5,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "eta,lag,mu");
    assert!(rows[1..4].iter().all(|r| r.split(',').nth(1) == Some("1")));
    assert_eq!(rows[4], "eta,mu_total");
    assert!(!text.contains("spearman"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spearman(eta, mu_1)"));
}

#[test]
fn stagewise_reports_each_stage() {
    let out = ssmlab(&[
        "stagewise",
        "--seed",
        "2",
        "--count",
        "100",
        "--strides",
        "4,2,1",
        "--delta",
        "0.01",
        "--timing",
        "off",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let deltas: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(deltas, vec![0.01, 0.005, 0.0025]);
    assert!(rows.iter().all(|r| r[4] == "0"));
}

#[test]
fn bounds_prints_unit_s4_coefficient() {
    let out = ssmlab(&["bounds", "--s4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .strip_prefix("s4,")
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - (std::f64::consts::E - 1.0)).abs() < 1e-12);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# demo\nseed = 9\ncount = 2\nhorizon = 1\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = ssmlab(&["--config", cfg, "gen-dynsys", "--kind", "vdp"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file).lines().count(), 1 + 2 * 101);

    let overridden = ssmlab(&["--config", cfg, "gen-dynsys", "--kind", "vdp", "--count", "1"]);
    assert_eq!(stdout(&overridden).lines().count(), 1 + 101);

    let explicit = ssmlab(&[
        "gen-dynsys",
        "--kind",
        "vdp",
        "--seed",
        "9",
        "--count",
        "2",
        "--horizon",
        "1",
    ]);
    assert_eq!(explicit.stdout, from_file.stdout);
}
