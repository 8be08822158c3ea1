use std::fs;
use std::process::{Command, Output};

fn puncture(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_puncture"));
    c.args(args);
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("PUNCTURE_")) {
        c.env_remove(k);
    }
    c
}

fn run(args: &[&str]) -> Output {
    puncture(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Metadata lines and CSV records of an output.
fn split(text: &str) -> (Vec<&str>, Vec<Vec<String>>) {
    let meta = text.lines().filter(|l| l.starts_with('#')).collect();
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes());
    let rows = r
        .records()
        .map(|x| x.unwrap().iter().map(String::from).collect())
        .collect();
    (meta, rows)
}

fn config_json(meta: &[&str]) -> serde_json::Value {
    let line = meta.iter().find_map(|l| l.strip_prefix("# config: ")).unwrap();
    serde_json::from_str(line).unwrap()
}

#[test]
fn missing_seed_is_a_config_error() {
    let o = run(&["ser-sweep"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn bad_values_are_config_errors() {
    for args in [
        &["ser-sweep", "--seed", "1", "--pair", "2-8"][..],
        &["ser-sweep", "--seed", "1", "--pair", "24"],
        &["ser-sweep", "--seed", "1", "--mapper", "best"],
        &["ser-sweep", "--seed", "1", "--mapper", "adaptive"],
        &["loss-vs-k", "--seed", "1", "--k-grid", "0"],
        &["ser-sweep", "--seed", "1", "--power-grid", ""],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(&path, "seed = 1\nlamda = [7.0]\n").unwrap();
    let o = run(&["ser-sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lamda"));
}

#[test]
fn loss_vs_k_table_is_self_describing() {
    let o = run(&[
        "loss-vs-k",
        "--seed",
        "3",
        "--trials",
        "500",
        "--pair",
        "2-4,2-16",
        "--k-grid",
        "1,300",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (meta, rows) = split(&text);
    assert!(meta[0].starts_with("# tool: puncture "));
    assert!(meta.contains(&"# seed: 3"));
    let cfg = config_json(&meta);
    assert_eq!(cfg["trials"], 500);
    assert_eq!(cfg["pairs"], serde_json::json!(["2-4", "2-16"]));
    assert_eq!(
        rows[0],
        [
            "k",
            "pair",
            "mapper",
            "zeta",
            "analytic_loss",
            "empirical_loss",
            "ci_lo",
            "ci_hi",
            "similarity"
        ]
    );
    // Two pairs, two mappers, two K values.
    assert_eq!(rows.len(), 1 + 8);
    for r in &rows[1..] {
        let analytic: f64 = r[4].parse().unwrap();
        let empirical: f64 = r[5].parse().unwrap();
        assert!((analytic - empirical).abs() < 0.06, "{r:?}");
    }
}

#[test]
fn flags_beat_environment_beats_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    fs::write(
        &path,
        "seed = 1\ntrials = 300\nk_grid = [1]\npairs = [\"2-2\"]\nmapper = [\"urllc\"]\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let seed_of = |o: &Output| config_json(&split(&stdout(o)).0)["seed"].as_u64().unwrap();

    let file = run(&["loss-vs-k", "--config", cfg]);
    assert_eq!(seed_of(&file), 1);
    let env = puncture(&["loss-vs-k", "--config", cfg])
        .env("PUNCTURE_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(seed_of(&env), 5);
    let flag = puncture(&["loss-vs-k", "--config", cfg, "--seed", "9"])
        .env("PUNCTURE_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(seed_of(&flag), 9);
    assert_eq!(config_json(&split(&stdout(&flag)).0)["trials"], 300);
}

#[test]
fn output_file_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = [
        "ser-sweep",
        "--seed",
        "2",
        "--trials",
        "20",
        "--pair",
        "2-16",
        "--mapper",
        "esrm",
        "--power-grid",
        "10,30",
    ];
    let mut first = args.to_vec();
    first.extend(["--out", a.to_str().unwrap()]);
    let mut second = args.to_vec();
    second.extend(["--out", b.to_str().unwrap(), "--execution", "sequential"]);
    assert!(run(&first).status.success());
    assert!(run(&second).status.success());
    let (ra, rb) = (fs::read_to_string(&a).unwrap(), fs::read_to_string(&b).unwrap());
    assert_eq!(split(&ra).1, split(&rb).1);
}

#[test]
fn ser_sweep_reports_both_schemes_and_gain() {
    let o = run(&[
        "ser-sweep",
        "--seed",
        "1",
        "--trials",
        "30",
        "--pair",
        "2-2",
        "--mapper",
        "urllc",
        "--power-grid",
        "0,20,40",
    ]);
    assert!(o.status.success());
    let (_, rows) = split(&stdout(&o));
    assert_eq!(rows.len(), 1 + 6);
    let gain = rows[0].iter().position(|h| h == "gain_db").unwrap();
    let proposed: Vec<_> = rows[1..].iter().filter(|r| r[3] == "proposed").collect();
    let baseline: Vec<_> = rows[1..].iter().filter(|r| r[3] == "baseline").collect();
    assert_eq!((proposed.len(), baseline.len()), (3, 3));
    assert!(proposed.iter().all(|r| !r[gain].is_empty()));
    assert!(baseline.iter().all(|r| r[gain].is_empty()));
    // The proposed floor sits below the baseline floor.
    let floor = |r: &Vec<String>| r[8].parse::<f64>().unwrap();
    assert!(floor(proposed[2]) < floor(baseline[2]));
}

#[test]
fn cell_commands_run() {
    let o = run(&[
        "reliability",
        "--seed",
        "1",
        "--trials",
        "4",
        "--mapper",
        "adaptive",
        "--power-grid",
        "20",
        "--targets",
        "0.01,0.1",
    ]);
    assert!(o.status.success());
    let (_, rows) = split(&stdout(&o));
    // Two schemes, two targets, the all-users row plus ten users.
    assert_eq!(rows.len(), 1 + 2 * 2 * 11);
    let ser = run(&[
        "ser-sweep",
        "--mode",
        "cell",
        "--seed",
        "1",
        "--trials",
        "4",
        "--mapper",
        "esrm",
        "--power-grid",
        "0,20",
    ]);
    assert!(ser.status.success());
    assert_eq!(split(&stdout(&ser)).1[1][0], "cell");
    let urllc = run(&[
        "urllc",
        "--mode",
        "cell",
        "--seed",
        "1",
        "--trials",
        "4",
        "--mapper",
        "urllc",
        "--power-grid",
        "10",
    ]);
    assert!(urllc.status.success());
}

#[test]
fn urllc_mapper_keeps_clean_ser() {
    let o = run(&[
        "urllc",
        "--seed",
        "1",
        "--trials",
        "50",
        "--pair",
        "2-4",
        "--mapper",
        "urllc,srm",
        "--power-grid",
        "10",
    ]);
    assert!(o.status.success());
    let (_, rows) = split(&stdout(&o));
    let urllc = &rows[1];
    let srm = &rows[2];
    assert_eq!(urllc[7], urllc[11]);
    assert_eq!(urllc[12], "0");
    let loss: f64 = srm[12].parse().unwrap();
    assert!((loss - 2.5).abs() < 0.3);
}

#[test]
fn bench_emits_fit() {
    let o = run(&["bench", "--seed", "1", "--trials", "20", "--k-grid", "75,150"]);
    assert!(o.status.success());
    let (_, rows) = split(&stdout(&o));
    assert_eq!(
        rows[0],
        [
            "k",
            "median_us",
            "p99_us",
            "comparisons",
            "fit_slope",
            "fit_intercept",
            "r2"
        ]
    );
    assert_eq!(rows[1][3], "1800");
    assert_eq!(rows[2][3], "3600");
}

#[test]
fn validate_passes_without_a_seed() {
    let o = run(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let (meta, rows) = split(&text);
    assert!(meta.contains(&"# seed: pinned per check"));
    assert_eq!(rows[0], ["check", "status", "value", "expected", "tolerance"]);
    assert!(rows[1..].iter().all(|r| r[1] == "pass"));
}
