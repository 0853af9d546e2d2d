use std::path::Path;
use std::process::{Command, Output};

const UNIT: &str = "[problem]\nmu = 1\nsigma = 1\ndelta = 0.5\nxi = 1\n";

fn divfx(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divfx"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn unit_config(dir: &Path) -> String {
    let path = dir.join("unit.toml");
    std::fs::write(&path, UNIT).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn beta_presets_and_ill_posed_shift() {
    let dir = tempfile::tempdir().unwrap();
    let o = divfx(&["--preset", "bsp1", "beta"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "beta") - 0.05).abs() < 1e-12);

    let o = divfx(&["--preset", "bsp2", "beta"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "beta") - 0.6).abs() < 1e-12);

    let o = divfx(
        &["--preset", "bsp1", "--delta", "-0.31", "beta"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!((field(&stdout(&o), "beta") + 0.01).abs() < 1e-12);
    assert!(stderr(&o).contains("ill-posed"));
}

#[test]
fn config_errors_exit_one_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        "[problem]\nmu = 1\nsigma = 1\ndelta = 0.5\nxi = 1\n\n[sim]\nnpaths = 3\n",
    )
    .unwrap();
    let o = divfx(&["--config", bad.to_str().unwrap(), "beta"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("npaths") && msg.contains("line 8"), "{msg}");

    std::fs::write(&bad, "[problem]\nmu = 1\nsigma = -1\ndelta = 0.5\nxi = 1\n").unwrap();
    let o = divfx(&["--config", bad.to_str().unwrap(), "solve"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("problem.sigma"));

    let o = divfx(&["--config", "/nonexistent/x.toml", "beta"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = divfx(&["beta"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = divfx(&["--preset", "bsp1", "frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = divfx(&["--preset", "bsp9", "beta"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_reports_barrier_and_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = unit_config(dir.path());
    let o = divfx(&["--config", &cfg, "solve"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = stdout(&o);
    assert!((field(&report, "barrier") - 0.623225).abs() < 1e-6);
    assert!(field(&report, "oracle_sup_gap") <= 5e-4);
    assert!(report.contains("case = threshold"));

    let (header, rows) = read_csv(&dir.path().join("value_function.csv"));
    assert_eq!(header, ["x", "F_or_G", "Fprime", "residual"]);
    assert_eq!(rows.len(), 2000);
    let last: f64 = rows.last().unwrap()[0].parse().unwrap();
    assert!((last - (3.0 * 0.62322524014 + 5.0)).abs() < 1e-9);
    let worst = rows
        .iter()
        .map(|r| r[3].parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-9, "{worst}");

    let o = divfx(
        &["--config", &cfg, "--mode", "unrestricted", "solve"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!((field(&stdout(&o), "barrier") - 1.24645).abs() < 1e-5);

    let o = divfx(&["--config", &cfg, "--delta", "-0.1", "solve"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_appends_estimates_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = unit_config(dir.path());
    let args = [
        "--config",
        &cfg,
        "--mode",
        "unrestricted",
        "simulate",
        "--n-paths",
        "4000",
        "--dt",
        "0.01",
    ];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let oa = divfx(&args, &a);
    let ob = divfx(&args, &b);
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(0));
    let ta = std::fs::read(a.join("estimates.csv")).unwrap();
    assert_eq!(ta, std::fs::read(b.join("estimates.csv")).unwrap());

    let mut with_alt = args.to_vec();
    with_alt.extend(["--barrier", "2.5"]);
    let o = divfx(&with_alt, &a);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dominated = true"));
    let (header, rows) = read_csv(&a.join("estimates.csv"));
    assert_eq!(
        header,
        [
            "strategy",
            "b",
            "r",
            "mean",
            "stderr",
            "truncation_bound",
            "n",
            "dt",
            "seed"
        ]
    );
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][0], "reflection");
    assert_eq!(rows[2][1], "2.5");
    assert_eq!(rows[2][2], "");
    assert_eq!(rows[0][6], "4000");
    assert_eq!(rows[0][8], "42");
}

#[test]
fn simulate_usage_errors_and_alarm() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = unit_config(dir.path());
    let o = divfx(
        &["--config", &cfg, "simulate", "--n-paths", "0"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let o = divfx(&["--config", &cfg, "simulate", "--rate", "2"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = divfx(
        &[
            "--config",
            &cfg,
            "simulate",
            "--x0",
            "-1",
            "--n-paths",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    // A tiny alarm threshold turns ordinary sampling noise into an alarm.
    let o = divfx(
        &[
            "--config",
            &cfg,
            "simulate",
            "--n-paths",
            "500",
            "--dt",
            "0.02",
            "--alarm",
            "1e-9",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
    assert!(stderr(&o).contains("alarm"));
}

#[test]
fn paths_round_trip_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = divfx(
        &[
            "--preset",
            "bsp2",
            "--format",
            "csv,svg",
            "paths",
            "--horizon",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&dir.path().join("paths.csv"));
    assert_eq!(header, ["t", "path_id", "value"]);
    assert_eq!(rows.len(), 5 * 1001);
    let ids: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(ids.len(), 5);
    let svg = std::fs::read_to_string(dir.path().join("paths.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="0 0 800 500""#));
    assert_eq!(svg.matches("<polyline").count(), 5);

    let zero = dir.path().join("zero.toml");
    std::fs::write(&zero, "[problem]\ndelta = 1.0\n").unwrap();
    let o = divfx(
        &[
            "--config",
            zero.to_str().unwrap(),
            "paths",
            "--n",
            "1",
            "--horizon",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("paths.csv"));
    for r in rows {
        let t: f64 = r[0].parse().unwrap();
        let v: f64 = r[2].parse().unwrap();
        assert!((t - v).abs() < 1e-12);
    }

    let o = divfx(&["--preset", "bsp1", "paths", "--n", "0"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sensitivity_grid_handling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = unit_config(dir.path());
    let o = divfx(&["--config", &cfg, "sensitivity"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("strictly decreasing: PASS"));
    let (header, rows) = read_csv(&dir.path().join("sensitivity.csv"));
    assert_eq!(header, ["beta", "x_r", "x_u"]);
    assert_eq!(rows.len(), 10);

    let o = divfx(
        &[
            "--config",
            &cfg,
            "sensitivity",
            "--betas",
            "1.0,0.7,0.4,0.1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS"));
    let (_, rows) = read_csv(&dir.path().join("sensitivity.csv"));
    let betas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(betas, [0.1, 0.4, 0.7, 1.0]);

    let o = divfx(
        &["--config", &cfg, "sensitivity", "--betas", "0.5,0,1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    let o = divfx(
        &["--config", &cfg, "sensitivity", "--betas", "-0.2,0.5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = unit_config(dir.path());
    for (sub, file) in [
        (vec!["solve", "--points", "300"], "value_function.csv"),
        (vec!["sensitivity"], "sensitivity.csv"),
        (vec!["paths", "--horizon", "5"], "paths.csv"),
    ] {
        let mut args = vec!["--config", cfg.as_str(), "--seed", "9"];
        args.extend(sub.iter().copied());
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        assert_eq!(divfx(&args, &a).status.code(), Some(0));
        assert_eq!(divfx(&args, &b).status.code(), Some(0));
        assert_eq!(
            std::fs::read(a.join(file)).unwrap(),
            std::fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
}
