use std::fs;
use std::process::{Command, Output};

use walkwait::engine;
use walkwait::{ArrivalDistribution, Scenario};

const S1_JSON: &str = r#"{"d":2,"d2":0.5,"vw":4,"vb":20,"tw":0.1,"dist":"uniform:0,0.25"}"#;

fn walkwait(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkwait"))
        .args(args)
        .env_remove("WALKWAIT_SEED")
        .output()
        .expect("binary runs")
}

fn s1_args(extra: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = ["--d", "2", "--d2", "0.5", "--vw", "4", "--vb", "20", "--tw", "0.1", "--dist", "uniform:0,0.25"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_s1(extra: &[&str]) -> Output {
    let args = s1_args(extra);
    walkwait(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value after `key` on the first line that starts with it.
fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn eval_variants() {
    let o = run_s1(&["eval", "--variant", "fully-corrected"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("total:          0.460000000000"), "{out}");
    assert!(out.starts_with("config: {"));

    let o = run_s1(&["eval", "--variant", "original-expr"]);
    assert!(stdout(&o).contains("total:          0.515000000000"));

    let o = run_s1(&["eval", "--variant", "original-eq4", "--dist", "exp:4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("VariantRequiresUniform"));
}

#[test]
fn eval_csv_row() {
    let o = run_s1(&["eval", "--csv"]);
    assert_eq!(
        stdout(&o),
        "variant,pre_walk,board_term,fallback_term,total,p_board,p_missed_early,p_no_bus\n\
         fully-corrected,0.125000000000,0.0500000000000,0.285000000000,0.460000000000,0.400000000000,0.400000000000,0.200000000000\n"
    );
    assert!(stderr(&o).contains("config: "));
}

#[test]
fn compare_exit_codes() {
    let o = run_s1(&["--trials", "1000000", "--seed", "42", "compare"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    let z_line = out.lines().find(|l| l.starts_with("fully-corrected")).unwrap();
    let z: f64 = z_line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(z.abs() < 4.0);
    let orig = out.lines().find(|l| l.starts_with("original-expr")).unwrap();
    let z: f64 = orig.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!(z > 10.0);

    let o = run_s1(&["--trials", "1000000", "--seed", "42", "compare", "--gate", "original-expr"]);
    assert_eq!(o.status.code(), Some(3));

    let o = run_s1(&["--tw", "0.2", "--trials", "1000000", "compare"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0.445000000000"));
}

#[test]
fn compare_zero_budget_is_exact() {
    for dist in ["uniform:0,0.25", "exp:4"] {
        let o = run_s1(&["--tw", "0", "--dist", dist, "--trials", "20000", "compare"]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert!(out.contains("mean 0.500000000000 stderr 0.00000000000"), "{out}");
        for line in out.lines().filter(|l| l.starts_with("original-eq4") || l.starts_with("distance") || l.starts_with("fully")) {
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols[1] != "n/a" {
                assert_eq!(cols[1], "0.500000000000", "{line}");
                assert_eq!(cols[2], "0.00000000000", "{line}");
            }
        }
    }
}

fn sweep_rows(extra: &[&str]) -> Vec<Vec<String>> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let mut args: Vec<&str> = extra.to_vec();
    let p = path.to_str().unwrap().to_string();
    args.extend(["--out", &p]);
    let mut full = vec!["sweep"];
    full.extend(args);
    let o = run_s1(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "param,value,variant,total,p_board,p_missed_early,p_no_bus,recommended");
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sweep_tw() {
    let rows = sweep_rows(&["--param", "tw", "--from", "0", "--to", "0.25", "--steps", "6"]);
    assert_eq!(rows.len(), 24);
    let first = &rows[3];
    assert_eq!((first[0].as_str(), first[1].as_str(), first[2].as_str()), ("tw", "0.00000000000", "fully-corrected"));
    assert_eq!(first[3], "0.500000000000");
    let order: Vec<&str> = rows[..4].iter().map(|r| r[2].as_str()).collect();
    assert_eq!(order, ["original-expr", "original-eq4", "distance-corrected", "fully-corrected"]);
    assert_eq!(rows[7][1], "0.0500000000000");
}

#[test]
fn sweep_d2_coincides_at_origin() {
    let rows = sweep_rows(&["--param", "d2", "--from", "0", "--to", "2", "--steps", "5"]);
    let at0 = rows.iter().find(|r| r[1] == "0.00000000000" && r[2] == "fully-corrected").unwrap();
    let s = Scenario::new(2.0, 0.0, 4.0, 20.0, 0.1).unwrap();
    let wait1 = engine::wait_at_stop1(&s, &ArrivalDistribution::uniform(0.0, 0.25).unwrap()).unwrap();
    assert!((at0[3].parse::<f64>().unwrap() - wait1.total).abs() <= 1e-12);
    assert_eq!(at0[7], "wait-at-stop1");
}

#[test]
fn sweep_vb_bounds_and_skips() {
    let rows = sweep_rows(&["--param", "vb", "--from", "5", "--to", "40", "--steps", "8"]);
    assert_eq!(rows.len(), 32);
    for r in rows.iter().filter(|r| r[2] == "fully-corrected" || r[2] == "distance-corrected") {
        let vb: f64 = r[1].parse().unwrap();
        let total: f64 = r[3].parse().unwrap();
        assert!(total >= 2.0 / vb - 1e-9 && total <= 0.5 + 0.1 + 1e-9, "{r:?}");
    }
    // vb = 2, 3, 4 are no faster than walking and get skipped
    let rows = sweep_rows(&["--param", "vb", "--from", "2", "--to", "6", "--steps", "5"]);
    assert_eq!(rows.len(), 2 * 4);
}

#[test]
fn sweep_exponential_omits_original_rows() {
    let rows = sweep_rows(&["--dist", "exp:4", "--param", "tw", "--from", "0", "--to", "0.2", "--steps", "3"]);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[2] == "distance-corrected" || r[2] == "fully-corrected"));
}

#[test]
fn sweep_invalid_grid() {
    let o = run_s1(&["sweep", "--param", "tw", "--from", "1", "--to", "0", "--steps", "1", "--out", "-"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("from < to"));
}

#[test]
fn breakeven_reports() {
    let o = run_s1(&["breakeven", "--solve-for", "tw", "--lo", "1e-6", "--hi", "0.25"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("no indifference point: walk-then-wait dominates on bracket"), "{}", stdout(&o));

    let o = run_s1(&["breakeven", "--solve-for", "tw", "--lo", "0", "--hi", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("InvalidBracket"));

    let o = run_s1(&["breakeven", "--lo", "0.01", "--hi", "1"]);
    let out = stdout(&o);
    let root = field(&out, "indifference point: tw = ");
    assert!((root - 0.3375).abs() <= 1e-9, "{out}");
    assert!(field(&out, "f(tw) = ").abs() <= 1e-8);

    let o = run_s1(&["--d2", "1.9", "--vb", "4.5", "breakeven"]);
    assert!(stdout(&o).contains("walk-all dominates"), "{}", stdout(&o));
}

#[test]
fn residual_reports() {
    let o = run_s1(&["--trials", "200000", "residual"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "quadrature: "), 0.0625);
    assert_eq!(field(&out, "closed form: "), 0.0625);
    assert!(out.contains("renewal extra wait | overtaken: "));

    let o = run_s1(&["--d2", "0", "--trials", "1000", "residual"]);
    let out = stdout(&o);
    assert_eq!(field(&out, "quadrature: "), 0.0);
    assert!(out.contains("empty"));

    let o = run_s1(&["--d2", "1.2", "residual"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("AssumptionViolated"));
    assert!(stderr(&o).contains("would always choose to wait"));

    let o = run_s1(&["--dist", "exp:4", "residual"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run_s1(&["--dist", "exp:4", "--tb", "0.25", "--trials", "1000", "residual"]);
    assert!(o.status.success());
}

#[test]
fn simulate_outputs() {
    let o = run_s1(&["--trials", "1000000", "--seed", "7", "simulate", "--strategy", "walk-then-wait"]);
    let out = stdout(&o);
    let (mean, se) = (field(&out, "mean:"), field(&out, "stderr:"));
    assert!((mean - 0.46).abs() <= 4.0 * se, "{out}");

    let o = run_s1(&["--trials", "5000", "simulate", "--strategy", "walk-all"]);
    let out = stdout(&o);
    assert_eq!(field(&out, "mean:"), 0.5);
    assert_eq!(field(&out, "stderr:"), 0.0);

    let a = run_s1(&["--trials", "100000", "--seed", "7", "simulate", "--csv"]);
    let b = run_s1(&["--trials", "100000", "--seed", "7", "simulate", "--csv"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("strategy,trials,mean,stderr,freq_board,freq_missed_early,freq_no_bus\nwalk-then-wait,100000,"));
}

#[test]
fn config_file_flags_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s1.json");
    fs::write(&path, S1_JSON).unwrap();
    let p = path.to_str().unwrap();

    let o = walkwait(&["--config", p, "eval"]);
    assert!(stdout(&o).contains("total:          0.460000000000"));

    let o = walkwait(&["--config", p, "--tw", "0.2", "eval"]);
    let out = stdout(&o);
    assert!(out.contains("total:          0.445000000000"));
    assert!(out.contains(r#""tw":0.2"#), "merged config echoed: {out}");

    let seeded = |seed: Option<&str>, flag: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_walkwait"));
        cmd.args(["--config", p, "--trials", "1000"]).args(flag).arg("simulate");
        match seed {
            Some(s) => cmd.env("WALKWAIT_SEED", s),
            None => cmd.env_remove("WALKWAIT_SEED"),
        };
        cmd.output().unwrap().stdout
    };
    let env5 = seeded(Some("5"), &[]);
    assert!(String::from_utf8_lossy(&env5).contains(r#""seed":5"#));
    assert_eq!(env5, seeded(None, &["--seed", "5"]));
    assert!(String::from_utf8_lossy(&seeded(None, &[])).contains(r#""seed":42"#));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"d":2,"d2":3,"vw":4,"vb":20,"tw":0.1,"dist":"uniform:0,0.25"}"#).unwrap();
    let o = walkwait(&["--config", bad.to_str().unwrap(), "eval"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Stop2BeyondDestination"));

    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"d":2,"colour":"red"}"#).unwrap();
    let o = walkwait(&["--config", unknown.to_str().unwrap(), "eval"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ParseError"));

    let o = walkwait(&["--config", "/nonexistent/x.json", "eval"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_one() {
    let o = walkwait(&["eval", "--variant", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    let o = walkwait(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}
