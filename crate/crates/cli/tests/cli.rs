use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robinplate")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows of a CSV table as header-keyed columns.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<String> {
    let (header, rows) = table(text);
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.into_iter().map(|r| r[i].clone()).collect()
}

fn floats(text: &str, name: &str) -> Vec<f64> {
    column(text, name).iter().map(|s| s.parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn ball_lists_two_modes() {
    let o = run(&["ball", "--dim", "2", "--tau", "1", "--alpha", "-0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (header, rows) = table(&text);
    assert_eq!(header, ["d", "tau", "alpha", "ell", "branch", "a", "b", "gamma", "lambda"]);
    assert_eq!(rows.len(), 2);
    let lambda = floats(&text, "lambda");
    assert!(lambda[0] < 0.0 && lambda[1] > 0.0);
    // byte-identical on repeat
    assert_eq!(text, stdout(&run(&["ball", "--dim", "2", "--tau", "1", "--alpha", "-0.5"])));
}

#[test]
fn ball_at_lower_endpoint_has_zero_branch() {
    let text = stdout(&run(&["ball", "--tau", "1", "--alpha", "-1"]));
    assert!(column(&text, "branch").iter().any(|b| b.eq_ignore_ascii_case("zero")), "{text}");
    assert!(floats(&text, "lambda")[1].abs() < 1e-10);
}

#[test]
fn ball_json_matches_csv() {
    let csv = stdout(&run(&["ball", "--dim", "3", "--tau", "2", "--alpha", "-1"]));
    let json = stdout(&run(&["ball", "--dim", "3", "--tau", "2", "--alpha", "-1", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
    let from_json: Vec<f64> = v.as_array().unwrap().iter().map(|m| m["lambda"].as_f64().unwrap()).collect();
    assert_eq!(from_json, floats(&csv, "lambda"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["ball", "--tau", "0"][..],
        &["ball", "--tau", "-1"],
        &["ball", "--dim", "1", "--tau", "1"],
        &["verify", "--suite", "no_such_check"],
        &["profile", "--tau", "1", "--r-max", "0"],
        &["iso", "--domain", "/nonexistent/domain.toml", "--tau", "1"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn sweep_endpoints_match_ball() {
    let text = stdout(&run(&["sweep", "--dim", "2", "--tau", "1", "--alpha-from", "-1", "--alpha-to", "0", "--points", "21"]));
    let alpha = floats(&text, "alpha");
    let (l1, l2) = (floats(&text, "lambda1"), floats(&text, "lambda2"));
    assert_eq!(alpha.len(), 21);
    assert_eq!((alpha[0], alpha[20]), (-1.0, 0.0));
    assert!(l1.windows(2).all(|w| w[1] > w[0]));
    for (i, &v) in l2.iter().enumerate() {
        assert_eq!(v.abs() < 1e-10, i == 0, "α = {}", alpha[i]);
    }
    for (i, a) in [(0, "-1"), (20, "0")] {
        let b = floats(&stdout(&run(&["ball", "--tau", "1", "--alpha", a])), "lambda");
        assert_eq!([l1[i], l2[i]], [b[0], b[1]]);
    }
}

#[test]
fn profile_table() {
    let text = stdout(&run(&["profile", "--dim", "3", "--tau", "2", "--alpha", "-1", "--r-max", "4", "--points", "41"]));
    let (_, rows) = table(&text);
    assert_eq!(rows.len(), 41);
}

#[test]
fn verify_with_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "grid.toml", "dims = [2, 3]\ntau_count = 3\nalpha_fractions = [0.25, 0.75]\nr_count = 40\nsample_count = 40\n");
    let o = run(&["verify", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 16);
    assert!(lines.iter().all(|l| l["pass"] == true));
    assert_eq!(lines[3]["grid_points"], 12);
    let again = run(&["verify", "--config", &cfg]);
    assert_eq!(text, stdout(&again));

    let one = run(&["verify", "--config", &cfg, "--suite", "ball_lambda2_bounds"]);
    assert_eq!(stdout(&one).lines().count(), 1);
    let bad = write(dir.path(), "bad.toml", "dims = []\n");
    assert_eq!(run(&["verify", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn domain_commands() {
    let dir = tempfile::tempdir().unwrap();
    let disk = write(dir.path(), "disk.toml", "kind = \"ellipse\"\nsemi_x = 1.0\nsemi_y = 1.0\n");
    let ellipse = write(dir.path(), "ellipse.json", r#"{"kind": "ellipse", "semi_x": 1.5, "semi_y": 0.6666666666666666}"#);

    let o = run(&["iso", "--domain", &disk, "--tau", "1", "--alpha", "-0.5", "--degree", "10"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["margin"].as_f64().unwrap().abs() < 1e-6);
    let o = run(&["iso", "--domain", &ellipse, "--tau", "1", "--alpha", "-0.5", "--degree", "10"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["margin"].as_f64().unwrap() > 0.0);

    let o = run(&["steklov", "--domain", &ellipse, "--tau", "1", "--degree", "10"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert!(v["margin"].as_f64().unwrap() > 0.0);

    let o = run(&["ritz", "--domain", &disk, "--tau", "1", "--alpha", "-0.5", "--count", "3", "--degree", "8"]);
    let text = stdout(&o);
    assert_eq!(column(&text, "index"), ["1", "2", "3"]);
    let out = dir.path().join("ritz.csv");
    let o = run(&["ritz", "--domain", &disk, "--tau", "1", "--alpha", "-0.5", "--count", "3", "--degree", "8", "-o", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["sweep", "--dim", "3", "--tau", "4", "--alpha-from", "-3", "--alpha-to", "-0.1", "--points", "9"];
    let one = Command::new(env!("CARGO_BIN_EXE_robinplate")).args(args).env("ROBINPLATE_THREADS", "1").output().unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_robinplate")).args(args).env("ROBINPLATE_THREADS", "4").output().unwrap();
    assert_eq!(one.stdout, many.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_robinplate")).args(args).env("ROBINPLATE_THREADS", "0").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
