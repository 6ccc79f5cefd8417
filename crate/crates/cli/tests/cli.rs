//! End-to-end tests of the binary: every subcommand is driven through real
//! process spawns, checking stdout, exit codes, and the files written to the
//! output directory.

use std::path::Path;
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn nfpe_lie(out: &Path, args: &[&str]) -> Run {
    let output = Command::new(env!("CARGO_BIN_EXE_nfpe-lie"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawning the binary");
    Run {
        code: output.status.code().expect("no exit code"),
        stdout: String::from_utf8(output.stdout).expect("stdout is UTF-8"),
        stderr: String::from_utf8(output.stderr).expect("stderr is UTF-8"),
    }
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

#[test]
fn classify_case_a_line_one_verifies_all_generators() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["classify", "--r", "-2/3", "--k", "-2/3"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("case: A(i)"));
    assert!(run.stdout.contains("generators: 5"));
    assert_eq!(run.stdout.matches("[VERIFIED]").count(), 5);
    assert!(!run.stdout.contains("[FAILED]"));

    let report = read_json(&dir.path().join("classify.json"));
    assert_eq!(report["all_verified"], serde_json::json!(true));
    assert_eq!(report["generators"].as_array().unwrap().len(), 5);
    assert_eq!(report["delta"], serde_json::json!("-2/3"));

    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], serde_json::json!("classify"));
    assert_eq!(manifest["inputs"]["r"], serde_json::json!("-2/3"));
    assert!(manifest["versions"]["nfpe-lie"].is_string());
}

#[test]
fn classify_generic_pair_gets_the_principal_pair_only() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["classify", "--r", "3/10", "--k", "7/10"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("generators: 2"));
    assert_eq!(run.stdout.matches("[VERIFIED]").count(), 2);
}

#[test]
fn classify_rejects_the_degenerate_pair_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["classify", "--r", "-1/2", "--k", "1/2"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("first-order linear"), "{}", run.stderr);
}

#[test]
fn classify_requires_r_and_k() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["classify", "--r", "1"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("--k"), "{}", run.stderr);
}

#[test]
fn config_file_fills_in_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "r = -1\nk = -1\nomega = 2\n").unwrap();
    let run = nfpe_lie(
        dir.path(),
        &["classify", "--config", cfg.to_str().unwrap(), "--k", "1"],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("case: B(ii)"), "{}", run.stdout);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["inputs"]["r"], serde_json::json!("-1"));
    assert_eq!(manifest["inputs"]["k"], serde_json::json!("1"));
    assert_eq!(manifest["inputs"]["omega"], serde_json::json!("2"));
}

#[test]
fn tables_case_a_writes_both_tables_and_diffs_clean() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["tables", "--case", "A"]);
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("oracle diff: OK"));
    let brackets = read_json(&dir.path().join("brackets_A.json"));
    assert_eq!(brackets["dimension"], serde_json::json!(5));
    let adjoint = read_json(&dir.path().join("adjoint_A.json"));
    assert_eq!(
        adjoint["eps"],
        serde_json::json!([0.1, 0.5, 1.0]),
        "default eps list"
    );
    assert!(dir.path().join("brackets_A.txt").exists());
    assert!(dir.path().join("adjoint_A.txt").exists());
}

#[test]
fn tables_case_c_scales_the_x3_column_exponentially() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &["tables", "--case", "C", "--delta", "1", "--eps", "0.5"],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let adjoint = read_json(&dir.path().join("adjoint_C.json"));
    let x1_table = &adjoint["tables"][0]["tables"][0];
    assert_eq!(x1_table["generator"], serde_json::json!("X1"));
    let scale = x1_table["matrix"][2][2].as_f64().unwrap();
    let q = 2.0 * (1.0 + 1.0);
    assert!(
        (scale - (q * 0.5_f64).exp()).abs() < 1e-12,
        "X3 image under Ad(exp(eps X1)) should scale by e^(q eps) = e^2, got {scale}"
    );
}

#[test]
fn tables_case_c_rejects_the_degenerate_delta() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["tables", "--case", "C", "--delta", "-1"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("degenerate"), "{}", run.stderr);
}

#[test]
fn reduce_rejects_a_violated_parameter_constraint_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &[
            "reduce", "--case", "A", "--rep", "b", "--alpha", "1", "--beta", "1",
        ],
    );
    assert_eq!(run.code, 2, "stdout: {}", run.stdout);
    assert!(run.stderr.contains("alpha^2 - 4 beta"), "{}", run.stderr);
}

#[test]
fn reduce_case_b_rep_b_reports_the_exponential_similarity_variable() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &[
            "reduce", "--case", "B", "--part", "i", "--rep", "b", "--alpha", "0",
        ],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("verification: certified"));
    let recipe = read_json(&dir.path().join("recipe.json"));
    assert_eq!(recipe["zeta"], serde_json::json!("x * exp(t/(1 - alpha))"));
    assert_eq!(recipe["params"]["alpha"], serde_json::json!(0.0));
    let verification = read_json(&dir.path().join("verification.json"));
    assert_eq!(verification["certified"], serde_json::json!(true));
}

#[test]
fn reduce_solve_integrates_and_writes_grid_with_residual() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &[
            "reduce", "--case", "C", "--part", "i", "--k", "1", "--rep", "X1", "--solve",
            "--n-x", "61", "--n-t", "5",
        ],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    for name in ["recipe.json", "verification.json", "ode.csv", "ode.json", "grid.csv",
        "residual.json"]
    {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(grid.starts_with("x,t,u\n"));
    let ode = std::fs::read_to_string(dir.path().join("ode.csv")).unwrap();
    assert!(ode.starts_with("zeta,y,yp\n"));
    let residual = read_json(&dir.path().join("residual.json"));
    assert!(residual["finest"]["sup_norm"].as_f64().unwrap() < 1e-2);
}

#[test]
fn solve_ode_samples_the_dense_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &[
            "solve-ode", "--case", "C", "--part", "i", "--delta", "1", "--rep", "X1",
            "--zeta-end", "1", "--n-samples", "11",
        ],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let ode = std::fs::read_to_string(dir.path().join("ode.csv")).unwrap();
    assert_eq!(ode.lines().count(), 12, "header plus 11 samples");
    let summary = read_json(&dir.path().join("ode.json"));
    assert!(summary["outcome"]["kind"].is_string());
    assert!(summary["n_steps"].as_u64().unwrap() > 0);
}

#[test]
fn solve_ode_requires_an_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &["solve-ode", "--case", "B", "--rep", "c"],
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("zeta-end"), "{}", run.stderr);
}

#[test]
fn evolve_conserves_mass_and_writes_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &[
            "evolve", "--r", "1", "--k", "1", "--initial", "1 + exp(-4*x^2)/2",
            "--x-lo", "-1", "--x-hi", "1", "--n-x", "81", "--t1", "0.05",
        ],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report = read_json(&dir.path().join("evolve.json"));
    assert!(report["mass_drift"].as_f64().unwrap() < 1e-8);
    let field = std::fs::read_to_string(dir.path().join("evolve.csv")).unwrap();
    assert!(field.starts_with("x,t,u\n"));
}

#[test]
fn evolve_rejects_a_nonpositive_initial_profile() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &[
            "evolve", "--r", "1", "--k", "1", "--initial", "-1 + x^2", "--x-lo", "-2",
            "--x-hi", "2", "--t1", "0.1",
        ],
    );
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("positive"), "{}", run.stderr);
}

#[test]
fn residual_measures_expressions_and_stored_grids() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(
        dir.path(),
        &[
            "residual", "--r", "1", "--k", "1", "--u", "2 + exp(-x^2 - t)/4",
            "--n-x", "21", "--n-t", "5",
        ],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    let report = read_json(&dir.path().join("residual.json"));
    assert_eq!(report["levels"].as_array().unwrap().len(), 3);
    assert!(report["sup_slope"].is_number());

    let grid_dir = tempfile::tempdir().unwrap();
    let solve = nfpe_lie(
        grid_dir.path(),
        &[
            "reduce", "--case", "C", "--part", "i", "--k", "1", "--rep", "X1", "--solve",
            "--n-x", "41", "--n-t", "5",
        ],
    );
    assert_eq!(solve.code, 0, "stderr: {}", solve.stderr);
    let grid_path = grid_dir.path().join("grid.csv");
    let run = nfpe_lie(
        dir.path(),
        &[
            "residual", "--r", "1", "--k", "1", "--grid", grid_path.to_str().unwrap(),
        ],
    );
    assert_eq!(run.code, 0, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("single level"));
}

#[test]
fn verify_all_filtered_to_case_b_reports_its_findings_and_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["verify-all", "--only", "case=B"]);
    assert_eq!(run.code, 3, "stderr: {}", run.stderr);
    assert!(run.stdout.contains("4 generators"), "{}", run.stdout);
    assert_eq!(run.stdout.matches("reduction: B(").count(), 3);
    assert!(!run.stdout.contains("[FAIL]"));

    let findings = read_json(&dir.path().join("findings.json"));
    let ids: Vec<&str> = findings
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["id"].as_str().unwrap())
        .collect();
    assert_eq!(
        ids,
        [
            "case-b-backward-parabolic",
            "optimal-system-b-alpha-range"
        ]
    );
    let report = read_json(&dir.path().join("verify.json"));
    assert_eq!(report["all_passed"], serde_json::json!(true));
}

#[test]
fn verify_all_reruns_are_byte_identical() {
    let once = |name: &str| {
        let dir = tempfile::tempdir().unwrap();
        let run = nfpe_lie(
            dir.path(),
            &["verify-all", "--only", "case=B", "--seed", "5"],
        );
        assert_eq!(run.code, 3, "{name} stderr: {}", run.stderr);
        (
            std::fs::read(dir.path().join("verify.json")).unwrap(),
            std::fs::read(dir.path().join("manifest.json")).unwrap(),
        )
    };
    let (verify_a, manifest_a) = once("first");
    let (verify_b, manifest_b) = once("second");
    assert_eq!(verify_a, verify_b);
    assert_eq!(manifest_a, manifest_b);
}

#[test]
fn verify_all_rejects_unknown_filters() {
    let dir = tempfile::tempdir().unwrap();
    let run = nfpe_lie(dir.path(), &["verify-all", "--only", "kind=fast"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("case"), "{}", run.stderr);
}
