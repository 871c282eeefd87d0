use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recwalk"))
        .args(args)
        .env_remove("RECWALK_CACHE_DIR")
        .output()
        .expect("spawn recwalk")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn odd_n_max_is_a_usage_error() {
    let o = run(&["return-law", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("even"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn return_law_passes_and_reports_header() {
    let o = run(&["return-law"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# recwalk format-version 1\n# config: {"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 500);
    assert!(rows[0].starts_with("2,5.0"));
    assert!(text.contains("# fit: slope=-1.50"));
}

#[test]
fn return_law_json_carries_exact_values() {
    let o = run(&["return-law", "--n-max", "100", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["config"]["command"], "return-law");
    assert_eq!(v["rows"][1]["exact"], "1/8");
    assert!(v["rows"][40].get("exact").is_none());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = run(&["classify", "--samples", "500", "--horizon", "200", "--out", p.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sequential_and_parallel_agree() {
    let args = ["green", "--n-max", "50", "--samples", "300", "--schedule", "10,50"];
    let par = run(&args);
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let seq = run(&seq_args);
    assert_eq!(par.stdout, seq.stdout);
}

fn lll_small(cache: &Path) -> Output {
    run(&["lll", "--l-max", "200", "--k-max", "40000", "--cache-dir", cache.to_str().unwrap()])
}

#[test]
fn lll_uses_the_cache_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let first = lll_small(dir.path());
    assert!(stderr(&first).contains("nu: computed"));
    assert!(dir.path().join("nu_L200_K40000.csv").exists());
    let second = lll_small(dir.path());
    assert!(stderr(&second).contains("nu: loaded from cache"));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&second);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("8,"));
    assert!(text.contains("# sigma_hat="));
}

#[test]
fn corrupted_cache_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("nu_L200_K40000.csv"), "garbage\n").unwrap();
    let o = lll_small(dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("delete it"));
}

#[test]
fn classify_reports_exact_values() {
    let o = run(&["classify", "--samples", "100", "--horizon", "100", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 6);
    let find = |name: &str| reports.iter().find(|r| r["point"] == name).unwrap();
    assert_eq!(find("O1")["p_recurrent"], "4/9");
    assert_eq!(find("O2")["p_recurrent"], "5/9");
    assert_eq!(find("R")["verdict"], "Transient");
    assert_eq!(find("pi")["verdict"], "Recurrent");
    assert_eq!(find("O1")["wide_ci"], true);
    assert_eq!(v["trichotomy"], true);
}

#[test]
fn green_runs_both_methods() {
    let o = run(&["green", "--n-max", "100", "--samples", "400", "--schedule", "10,100"]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("# growth 10->100"));
    let rows = data_rows(&text);
    let ns: Vec<u64> = rows.iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ns, vec![1, 2, 5, 10, 20, 50, 100]);
    for r in rows {
        let cols: Vec<f64> = r.split(',').skip(1).map(|c| c.parse().unwrap()).collect();
        assert!(cols[0] > 0.0 && cols[2] > 0.0);
    }
}

#[test]
fn zero_samples_is_a_usage_error() {
    assert_eq!(run(&["classify", "--samples", "0"]).status.code(), Some(1));
}
