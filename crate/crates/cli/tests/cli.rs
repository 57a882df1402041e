use std::process::{Command, Output};

fn dg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dg")).args(args).output().expect("dg runs")
}

fn dg_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dg"))
        .env("DG_THREADS", threads)
        .args(args)
        .output()
        .expect("dg runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// CSV body without the timestamp line.
fn body(text: &str) -> String {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# dg "));
    lines.collect::<Vec<_>>().join("\n")
}

fn rows(text: &str) -> Vec<Vec<String>> {
    body(text).lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn alpha_of_the_triangle() {
    let o = dg(&["alpha", "1,2;2,3;1,3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "3/2\n");
    assert_eq!(stdout(&dg(&["alpha", "1;1"])), "1\n");
}

#[test]
fn standard_form_reduction() {
    let o = dg(&["standard-form", "1,2;1;2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1;1;1\n");
}

#[test]
fn constants_have_six_decimals() {
    let text = stdout(&dg(&["constants"]));
    let get = |name: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(&format!("{name},"))).unwrap().parse().unwrap()
    };
    assert!((get("delta") - 0.418571).abs() <= 1e-5);
    assert!((get("K_min") - 2.285).abs() <= 1e-3);
    assert!((get("L_min") - 3.123).abs() <= 1e-3);
    assert!(text.lines().skip(1).all(|l| l.split('.').nth(1).unwrap().len() == 6));
}

#[test]
fn parseval_small_support_is_exact() {
    let o = dg(&["verify-parseval", "--dim", "3", "--levels", "6", "--trials", "100", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let header = body(&text).lines().next().unwrap().to_string();
    assert_eq!(header, "case_id,inputs_digest,value,expected,defect,budget,pass");
    let r = rows(&text);
    assert_eq!(r.len(), 100);
    for row in &r {
        assert_eq!(row[6], "true");
        assert!(row[4].parse::<f64>().unwrap() <= 1e-12);
    }
    for row in rows(&stdout(&dg(&["verify-parseval", "--dim", "1", "--trials", "20"]))) {
        assert_eq!(row[4], "0e0");
    }
}

#[test]
fn parseval_dimension_four() {
    let o = dg(&["verify-parseval", "--dim", "4", "--levels", "12", "--trials", "50", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&stdout(&o)) {
        assert!(row[4].parse::<f64>().unwrap() <= 5e-9);
    }
}

#[test]
fn lp_pairing_with_p_one() {
    let o = dg(&["verify-lp-pairing", "--p", "1", "--dim", "5", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0));
    for row in rows(&stdout(&o)) {
        assert_eq!(row[4], "0e0");
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["verify-multilinear", "--alphabet", "3", "--trials", "12", "--seed", "99"];
    let a = stdout(&dg_threads("1", &args));
    let b = stdout(&dg_threads("4", &args));
    assert_eq!(body(&a), body(&b));
    let c = stdout(&dg_threads("2", &["verify-multilinear", "--alphabet", "3", "--trials", "12", "--seed", "98"]));
    assert_ne!(body(&a), body(&c));
}

#[test]
fn json_mirrors_csv() {
    let args = ["psi", "--k", "2"];
    let csv = rows(&stdout(&dg(&args)));
    let json: serde_json::Value = serde_json::from_str(&stdout(&dg(&[&args[..], &["--format", "json"]].concat()))).unwrap();
    let arr = json.as_array().unwrap();
    assert_eq!(arr.len(), csv.len());
    for (j, c) in arr.iter().zip(&csv) {
        assert_eq!(j["case_id"].to_string(), c[0]);
        assert_eq!(j["inputs_digest"].as_str().unwrap(), c[1]);
        assert_eq!(j["value"].to_string(), c[2]);
        assert_eq!(j["pass"].to_string(), c[6]);
    }
    assert_eq!(arr.last().unwrap()["value"], 8);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ksz.csv");
    let o = dg(&["ksz", "--n", "2,4", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(rows(&text).len(), 2);
}

#[test]
fn configuration_errors_exit_three_with_a_json_record() {
    for args in [
        &["alpha", "1,2;;"][..],
        &["verify-parseval", "--no-such-flag"],
        &["verify-lp-pairing", "--p", "0.5"],
        &["verify-parseval", "--levels", "0"],
    ] {
        let o = dg(args);
        assert_eq!(o.status.code(), Some(3), "{args:?}");
        let rec: serde_json::Value = serde_json::from_slice(o.stderr.split(|&b| b == b'\n').next().unwrap()).unwrap();
        assert!(rec["error"].is_string() && rec["message"].is_string(), "{args:?}");
    }
    let o = dg_threads("0", &["psi"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn check_failures_exit_two() {
    // a non-increasing N list makes the monotonicity check fail
    let o = dg(&["ksz", "--n", "6,2", "--trials", "1", "--samples", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(rows(&stdout(&o)).iter().any(|r| r[6] == "false"));
}
