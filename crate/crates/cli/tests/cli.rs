//! End-to-end tests of the `entspec` binary: command examples, output
//! schemas, seed policy, config merging, exit codes, and byte-level
//! reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_entspec"));
    // A budget cap in the ambient environment must not leak into tests.
    c.env_remove("ENTSPEC_BUDGET_MB");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn entspec")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "entspec {args:?} failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn run_code(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Parses `# key = value` header comments.
fn header_value<'a>(output: &'a str, key: &str) -> Option<&'a str> {
    let csv_prefix = format!("# {key} = ");
    let dot_prefix = format!("// {key} = ");
    output.lines().find_map(|l| {
        l.strip_prefix(&csv_prefix)
            .or_else(|| l.strip_prefix(&dot_prefix))
    })
}

/// Data rows of a CSV output: everything after the comment block and the
/// column header line, split on commas.
fn csv_rows(output: &str) -> Vec<Vec<String>> {
    output
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(output: &str) -> serde_json::Value {
    serde_json::from_str(output).expect("JSON output")
}

#[test]
fn spectrum_d3_merges_to_one_interval_plus_zero() {
    let v = json(&run_ok(&["spectrum", "--d", "3", "--lambda", "1,0,-1"]));
    assert_eq!(v["merged"].as_array().unwrap().len(), 1);
    assert_eq!(v["merged"][0]["lo"], 3.0);
    assert_eq!(v["merged"][0]["hi"], 4.0);
    assert_eq!(v["points"].as_array().unwrap(), &[serde_json::json!(0.0)]);
    assert_eq!(v["config"]["d"], "3");
    assert_eq!(v["config"]["format"], "json");
}

#[test]
fn spectrum_d2_is_one_full_interval() {
    let v = json(&run_ok(&["spectrum", "--d", "2", "--lambda", "1,-1"]));
    assert_eq!(v["merged"].as_array().unwrap().len(), 1);
    assert_eq!(v["merged"][0]["lo"], 0.0);
    assert_eq!(v["merged"][0]["hi"], 2.0);
    assert!(v["points"].as_array().unwrap().is_empty());
}

#[test]
fn spectrum_d4_report_and_bold_poset() {
    let v = json(&run_ok(&[
        "spectrum",
        "--d",
        "4",
        "--lambda",
        "0.9,0.3,-0.3,-0.9",
    ]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 8);

    let dot = run_ok(&[
        "spectrum",
        "--d",
        "4",
        "--lambda",
        "0.9,0.3,-0.3,-0.9",
        "--format",
        "dot",
    ]);
    assert!(dot.starts_with("// entspec spectrum\n"));
    let bold = dot.lines().filter(|l| l.contains("style=bold")).count();
    assert_eq!(bold, 5, "expected five bold covering edges:\n{dot}");
}

#[test]
fn spectrum_rejects_bad_exponents() {
    let (code, err) = run_code(&["spectrum", "--d", "3", "--lambda", "1,2,-3"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("sorted"), "{err}");
    let (code, err) = run_code(&["spectrum", "--d", "3", "--lambda", "1,0,-0.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("sum to 0"), "{err}");
    let (code, _) = run_code(&["spectrum", "--d", "3"]);
    assert_eq!(code, 2);
}

#[test]
fn free_entropy_free_tree_curve_and_determinism() {
    let args = ["free-entropy", "--ell", "2", "--p", "1", "--mu", "srw:2", "--nmax", "12"];
    let out = run_ok(&args);
    assert!(out.starts_with("# entspec free-entropy\n# units = nats\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 13);
    // Exact single-cover values: H_2 and the final increment, which is
    // the summary estimate echoed in the header.
    let h2: f64 = rows[2][1].parse().unwrap();
    assert!((h2 - 2.4260151319598084).abs() < 1e-12);
    let inc12: f64 = rows[12][2].parse().unwrap();
    assert!((inc12 - 0.6100450423976).abs() < 1e-9, "inc12 = {inc12}");
    let est: f64 = header_value(&out, "estimate").unwrap().parse().unwrap();
    assert_eq!(est, inc12);
    assert_eq!(header_value(&out, "method"), Some("exact-dp"));
    assert_eq!(run_ok(&args), out, "same command, same bytes");
}

#[test]
fn free_entropy_requires_seed_only_for_random_covers() {
    let (code, err) = run_code(&["free-entropy", "--p", "0.5", "--nmax", "4"]);
    assert_eq!(code, 2);
    assert!(err.contains("--seed"), "{err}");
    let out = run_ok(&[
        "free-entropy", "--p", "0.5", "--nmax", "4", "--samples", "6", "--seed", "7",
    ]);
    assert_eq!(header_value(&out, "seed"), Some("7"));
    assert_eq!(header_value(&out, "covers_used"), Some("6"));
}

#[test]
fn sweep_emits_one_row_per_grid_point_with_exact_endpoints() {
    let sweep = run_ok(&[
        "sweep", "--p-grid", "0:1:0.5", "--nmax", "5", "--samples", "4", "--seed", "3",
    ]);
    let rows = csv_rows(&sweep);
    assert_eq!(rows.len(), 3);
    let ps: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ps, ["0", "0.5", "1"]);
    // First row has no adjacent difference; later rows do.
    assert!(rows[0][3].is_empty());
    assert!(!rows[1][3].is_empty());

    // Endpoints are deterministic single covers: they match free-entropy
    // byte-for-byte (same code path), with zero CI.
    for (p, row) in [("0", &rows[0]), ("1", &rows[2])] {
        let fe = run_ok(&["free-entropy", "--p", p, "--nmax", "5"]);
        let est = header_value(&fe, "estimate").unwrap();
        assert_eq!(row[1], est, "sweep endpoint p={p} vs free-entropy");
        assert_eq!(row[2], "0");
    }
}

#[test]
fn ball_trivial_radius_two_has_17_vertices() {
    let dot = run_ok(&["ball", "--oracle", "trivial", "--radius", "2", "--format", "dot"]);
    assert!(dot.starts_with("// entspec ball\n"));
    assert_eq!(header_value(&dot, "vertices"), Some("17"));
    let declared = dot
        .lines()
        .filter(|l| l.contains("[label=") && !l.contains(" -- "))
        .count();
    assert_eq!(declared, 17);
    assert_eq!(header_value(&dot, "self_loops"), Some("0"));
}

#[test]
fn ball_two_block_csv_counts_loops() {
    let csv = run_ok(&["ball", "--oracle", "kl:2", "--radius", "3", "--format", "csv"]);
    assert_eq!(header_value(&csv, "vertices"), Some("21"));
    assert_eq!(header_value(&csv, "self_loops"), Some("16"));
    let rows = csv_rows(&csv);
    let loops = rows.iter().filter(|r| r[3] == "1").count();
    assert_eq!(loops, 16);
}

#[test]
fn shadows_groups_sum_to_one_and_expose_tv() {
    let args = [
        "shadows", "--ell", "2", "--p", "0.5", "--sphere", "1", "--t", "8,16",
        "--samples", "1000", "--horizon", "64", "--margin", "4", "--seed", "9",
    ];
    let out = run_ok(&args);
    let rows = csv_rows(&out);
    // Three groups (hitting, t=8, t=16) over the 4 sphere-1 cells.
    assert_eq!(rows.len(), 12);
    for method in [("hitting-mc", ""), ("prefix-phi", "8"), ("prefix-phi", "16")] {
        let mass: f64 = rows
            .iter()
            .filter(|r| r[0] == method.0 && r[1] == method.1)
            .map(|r| r[3].parse::<f64>().unwrap())
            .sum();
        assert!((mass - 1.0).abs() < 1e-8, "{method:?} masses sum to {mass}");
    }
    // The TV column is populated on prefix rows and echoed per t.
    let tv8: f64 = header_value(&out, "tv_t8").unwrap().parse().unwrap();
    assert!(tv8 >= 0.0 && tv8 <= 1.0);
    assert_eq!(
        rows.iter().find(|r| r[1] == "8").unwrap()[5],
        header_value(&out, "tv_t8").unwrap()
    );
    assert_eq!(run_ok(&args), out, "same command, same bytes");
}

#[test]
fn lyapunov_reads_diagonal_atom_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("diag2.toml");
    std::fs::write(&dist, "d = 2\n[[atom]]\nmatrix = [[2.0, 0.0], [0.0, 0.5]]\n").unwrap();
    let out = run_ok(&["lyapunov", "--dist", dist.to_str().unwrap(), "--steps", "1000"]);
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 2);
    let l1: f64 = rows[0][1].parse().unwrap();
    let l2: f64 = rows[1][1].parse().unwrap();
    assert!((l1 - std::f64::consts::LN_2).abs() < 1e-9);
    assert!((l2 + std::f64::consts::LN_2).abs() < 1e-9);
    assert_eq!(header_value(&out, "sl_constraint_ok"), Some("true"));
    // A single atom is deterministic, so no seed is demanded.
    assert_eq!(header_value(&out, "seed"), Some("0"));
}

#[test]
fn lyapunov_demands_seed_for_stochastic_distributions() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("two.toml");
    std::fs::write(
        &dist,
        "[[atom]]\nmatrix = [[2.0, 0.0], [0.0, 0.5]]\n[[atom]]\nmatrix = [[1.0, 1.0], [0.0, 1.0]]\n",
    )
    .unwrap();
    let (code, err) = run_code(&["lyapunov", "--dist", dist.to_str().unwrap(), "--steps", "100"]);
    assert_eq!(code, 2);
    assert!(err.contains("--seed"), "{err}");
}

#[test]
fn budget_cap_exits_with_code_three() {
    let out = bin()
        .env("ENTSPEC_BUDGET_MB", "1")
        .args(["free-entropy", "--p", "1", "--nmax", "12"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget"), "{err}");
}

#[test]
fn config_file_fills_gaps_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "p = 0.5\nnmax = 5\nseed = 42\nsamples = 6\n").unwrap();
    let from_config = run_ok(&["free-entropy", "--config", cfg.to_str().unwrap()]);
    let from_flags = run_ok(&[
        "free-entropy", "--p", "0.5", "--nmax", "5", "--seed", "42", "--samples", "6",
    ]);
    assert_eq!(from_config, from_flags);

    let overridden = run_ok(&["free-entropy", "--config", cfg.to_str().unwrap(), "--p", "1"]);
    assert_eq!(header_value(&overridden, "p"), Some("1"));

    let (code, err) = run_code(&["free-entropy", "--config", "/nonexistent/x.toml", "--p", "1", "--nmax", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("config"), "{err}");

    std::fs::write(&cfg, "p = 0.5\nnmax = 5\nseed = 42\nbogus = 1\n").unwrap();
    let (code, err) = run_code(&["free-entropy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let stdout = run_ok(&["free-entropy", "--p", "0", "--nmax", "4"]);
    run_ok(&[
        "free-entropy", "--p", "0", "--nmax", "4", "--out", path.to_str().unwrap(),
    ]);
    let file = std::fs::read_to_string(&path).unwrap();
    // The file records its own destination; stdout runs do not.
    let strip = |s: &str| -> String {
        s.lines()
            .filter(|l| !l.starts_with("# out = "))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&file), strip(&stdout));
    assert!(file.contains("# out = "));
    assert!(Path::new(&path).exists());
}
