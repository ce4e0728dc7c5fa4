//! End-to-end runs of the binary: the documented invocations, output
//! shapes in both formats, exit codes, and byte-level determinism.

use std::io::Write;
use std::process::{Command, Output};

const LIN_SOURCE: &str = "system lin\n\
                          class T0 = node\n\
                          class T1 = node / [T0:1] | [T1:1]\n\
                          def Lin = T0 | T1\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_forestlab"))
}

fn lin_file() -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new()
        .suffix(".fst")
        .tempfile()
        .expect("temp file");
    f.write_all(LIN_SOURCE.as_bytes()).expect("write system");
    f
}

fn repo_system(name: &str) -> String {
    format!("{}/../../systems/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout_of(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("utf8 stdout")
}

fn stderr_of(out: &Output) -> &str {
    std::str::from_utf8(&out.stderr).expect("utf8 stderr")
}

#[test]
fn eval_prints_ten_rows_of_ones() {
    let lin = lin_file();
    let out = bin()
        .args(["eval", "--system"])
        .arg(lin.path())
        .args(["--class", "Lin", "--order", "10", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let lines: Vec<&str> = stdout_of(&out).lines().collect();
    assert_eq!(lines[0], "n,coefficient");
    assert_eq!(lines.len(), 11, "header plus ten data rows");
    for (i, line) in lines[1..].iter().enumerate() {
        assert_eq!(*line, format!("{},1", i + 1));
    }
}

#[test]
fn law_reports_convergence_on_linear_trees() {
    let lin = lin_file();
    let out = bin()
        .args(["law", "--system"])
        .arg(lin.path())
        .args(["--class", "Lin", "--order", "5000"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(stdout_of(&out)).unwrap();
    assert_eq!(json["structural"], "RADIUS_ONE");
    assert_eq!(json["ratio"]["verdict"], "CONVERGES_TO_ONE");
    assert_eq!(json["coherence"], "AGREE");
}

#[test]
fn explicit_refuses_sub_one_systems() {
    let out = bin()
        .args(["explicit", "--system", &repo_system("alltrees.fst")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("RADIUS_SUB_ONE: explicit form unavailable"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn explicit_emits_every_form_in_csv() {
    let out = bin()
        .args([
            "explicit",
            "--system",
            &repo_system("bamboo.fst"),
            "--format",
            "csv",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.starts_with("class,form\n"));
    assert!(text.contains("Ta,let T0 = x in let Ta = x * x/(1-x^3) * T0 in Ta\n"));
}

#[test]
fn classify_reports_verdicts_and_growth() {
    let out = bin()
        .args([
            "classify",
            "--system",
            &repo_system("bamboo.fst"),
            "--order",
            "60",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(stdout_of(&out)).unwrap();
    assert_eq!(json["radius"]["overall"], "RADIUS_ONE");
    assert_eq!(json["radius"]["classes"][1]["verdict"], "RADIUS_ONE");
    assert_eq!(json["growth"]["order"], 60);
    let checks = json["growth"]["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .all(|c| c["agrees"] != serde_json::json!(false)));
}

#[test]
fn enumerate_filters_to_class_members() {
    let out = bin()
        .args([
            "enumerate",
            "--size",
            "4",
            "--system",
            &repo_system("evenchains.fst"),
            "--class",
            "Even",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(stdout_of(&out)).unwrap();
    assert_eq!(json["count"], 1);
    assert_eq!(json["trees"][0], "(((())))");
}

#[test]
fn enumerate_lists_all_trees_without_a_filter() {
    let out = bin()
        .args(["enumerate", "--size", "4", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let lines: Vec<&str> = stdout_of(&out).lines().collect();
    assert_eq!(lines[0], "tree");
    assert_eq!(lines.len(), 5, "four rooted trees on four nodes");
}

#[test]
fn gfun_evaluates_closed_forms() {
    let out = bin()
        .args(["gfun", "--expr", "x * Egeq(1, x)", "--order", "6"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(stdout_of(&out)).unwrap();
    assert_eq!(json["expr"], "x * Egeq(1, x)");
    // x * (E(x) - 1) = x * (1/(1-x) - 1) = x^2/(1-x)
    let coefficients = json["coefficients"].as_array().unwrap();
    assert_eq!(coefficients[0]["coefficient"], "0");
    assert_eq!(coefficients[1]["coefficient"], "0");
    for row in &coefficients[2..] {
        assert_eq!(row["coefficient"], "1");
    }
}

#[test]
fn factor_splits_modules_into_indecomposables() {
    let out = bin()
        .args(["factor", "((()())())@0.0", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert_eq!(text, "position,module,size\n0,(()())@0,2\n1,(()())@0,2\n");
}

#[test]
fn factor_of_the_identity_is_empty() {
    let out = bin().args(["factor", "()@"]).output().unwrap();
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(stdout_of(&out)).unwrap();
    assert_eq!(json["size"], 0);
    assert_eq!(json["factors"].as_array().unwrap().len(), 0);
}

#[test]
fn order_cap_from_the_environment_is_enforced() {
    let lin = lin_file();
    let out = bin()
        .env("FORESTLAB_MAX_ORDER", "100")
        .args(["eval", "--system"])
        .arg(lin.path())
        .args(["--class", "Lin", "--order", "200"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr_of(&out).contains("exceeds the configured bound 100"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn inconsistent_window_is_a_usage_error() {
    let lin = lin_file();
    let out = bin()
        .args(["eval", "--system"])
        .arg(lin.path())
        .args(["--class", "Lin", "--order", "10", "--window", "5..20"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn class_filter_without_a_system_is_a_usage_error() {
    let out = bin()
        .args(["enumerate", "--size", "3", "--class", "Lin"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_names_are_domain_errors() {
    let lin = lin_file();
    let out = bin()
        .args(["eval", "--system"])
        .arg(lin.path())
        .args(["--class", "Missing", "--order", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("Missing"));
}

#[test]
fn identical_invocations_print_identical_bytes() {
    let run = || {
        bin()
            .args([
                "classify",
                "--system",
                &repo_system("evenchains.fst"),
                "--order",
                "80",
            ])
            .output()
            .unwrap()
    };
    let first = run();
    let second = run();
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}
