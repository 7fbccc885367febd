use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn moplat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moplat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not a JSON report ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn residual(r: &Value, key: &str) -> f64 {
    r["max_residuals"][key]
        .as_f64()
        .unwrap_or_else(|| panic!("missing residual {key}: {r}"))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_both_routes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("table.json");
    let out = moplat(&[
        "generate",
        "--family",
        "hermite",
        "--c1",
        "0",
        "--c2",
        "2",
        "--window",
        "3",
        "3",
        "--route",
        "both",
        "--out",
        path_str(&table),
    ]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["command"], "generate");
    assert_eq!(r["pass"], true);
    assert!(residual(&r, "route_difference") < 1e-10);
    assert_eq!(r["artifacts"][0], path_str(&table));
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(t["coeffs"].as_array().unwrap().len(), 4);
}

#[test]
fn coincident_hermite_is_not_normal() {
    let out = moplat(&[
        "generate", "--family", "hermite", "--c1", "1", "--c2", "1", "--window", "3", "3",
    ]);
    assert_eq!(code(&out), 3);
    let r = report(&out);
    assert_eq!(r["pass"], false);
    assert_eq!(r["error"]["kind"], "not_normal");
}

#[test]
fn empty_window_holds_the_unit_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.json");
    let out = moplat(&[
        "generate",
        "--family",
        "meixner1",
        "--window",
        "0",
        "0",
        "--out",
        path_str(&table),
    ]);
    assert_eq!(code(&out), 0);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(t["coeffs"][0][0][0].as_f64(), Some(1.0));
    assert_eq!(t["coeffs"][0][0].as_array().unwrap().len(), 1);
}

#[test]
fn window_cap_is_a_usage_error() {
    let out = moplat(&["generate", "--family", "hermite", "--window", "7", "6"]);
    assert_eq!(code(&out), 2);
    let ok = moplat(&[
        "generate",
        "--family",
        "hermite",
        "--window",
        "7",
        "6",
        "--precision",
        "extended",
    ]);
    assert_eq!(code(&ok), 0);
}

#[test]
fn verify_reports_meixner_degeneracy_values() {
    let out = moplat(&["verify", "--family", "meixner1", "--beta", "1", "--window", "4", "4"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert!(residual(&r, "curvature") < 1e-10);
    let dvals = &r["degeneracy"]["D"];
    for n in 0..4 {
        for m in 0..4 {
            let d = dvals[n][m].as_f64().unwrap();
            let want = -8.0 / (1.0 + (n + m) as f64);
            assert!((d - want).abs() < 1e-10, "D({n},{m}) = {d}");
        }
    }
    assert_eq!(r["degeneracy"]["nondegenerate"], true);
    assert_eq!(r["symmetrizable"], true);
}

#[test]
fn verify_laguerre_is_consistent_but_not_symmetrizable() {
    let out = moplat(&["verify", "--family", "laguerre1", "--window", "4", "4"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["curvature_pass"], true);
    assert_eq!(r["symmetrizable"], false);
}

#[test]
fn verify_constant_toy_is_degenerate_everywhere() {
    let out = moplat(&["verify", "--family", "constant_toy", "--window", "3", "3"]);
    let r = report(&out);
    assert_eq!(r["degeneracy"]["degenerate"], true);
    // The forced boundary zeros break the consistency conditions next to the axes.
    assert_eq!(r["curvature_pass"], false);
    assert_eq!(code(&out), 6);
}

#[test]
fn operator_deltas_is_symmetric_with_eigenvectors() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("deltas.csv");
    let out = moplat(&[
        "operator",
        "--family",
        "hermite",
        "--c1",
        "0",
        "--c2",
        "2",
        "--window",
        "4",
        "4",
        "--kind",
        "deltas",
        "--eigencheck",
        "0,1,-1",
        "--format",
        "csv",
        "--out",
        path_str(&mat),
    ]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert!(residual(&r, "deltas_eigencheck") < 1e-9);
    assert_eq!(residual(&r, "deltas_asymmetry"), 0.0);
    let text = std::fs::read_to_string(&mat).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v, rows[j][i]);
        }
    }
}

#[test]
fn operator_deltas_on_laguerre_is_not_symmetrizable() {
    let out = moplat(&["operator", "--family", "laguerre1", "--kind", "deltas"]);
    assert_eq!(code(&out), 4);
    assert_eq!(report(&out)["error"]["kind"], "not_symmetrizable");
}

#[test]
fn operator_h1_is_monic_and_nonsymmetric() {
    let dir = tempfile::tempdir().unwrap();
    let mat = dir.path().join("h1.json");
    let out = moplat(&[
        "operator",
        "--family",
        "meixner1",
        "--kind",
        "h1",
        "--out",
        path_str(&mat),
    ]);
    assert_eq!(code(&out), 0);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(&mat).unwrap()).unwrap();
    let entries = t["entries"].as_array().unwrap();
    let get = |i: u64, j: u64| {
        entries
            .iter()
            .find(|e| e[0] == i && e[1] == j)
            .map_or(0.0, |e| e[2].as_f64().unwrap())
    };
    // Row of site (0,0) couples to (1,0) with the monic weight 1.
    assert_eq!(get(0, 1), 1.0);
    assert_ne!(get(1, 0), get(0, 1));
}

#[test]
fn multiple_kinds_get_tagged_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("op.json");
    let out = moplat(&[
        "operator",
        "--family",
        "meixner1",
        "--kind",
        "h1,j2",
        "--out",
        path_str(&base),
    ]);
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("op.h1.json").exists());
    assert!(dir.path().join("op.j2.json").exists());
}

#[test]
fn lax_on_closed_form_fields() {
    let r = report(&moplat(&["lax", "--family", "hermite", "--window", "4", "4"]));
    assert!(residual(&r, "zero_curvature") <= 1e-12);
    let out = moplat(&["lax", "--family", "meixner1", "--window", "5", "5", "--path", "both"]);
    assert_eq!(code(&out), 0);
    assert!(residual(&report(&out), "path_discrepancy") < 1e-9);
}

#[test]
fn lax_rejects_a_perturbed_field_file() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.json");
    let out = moplat(&[
        "generate",
        "--family",
        "meixner1",
        "--window",
        "4",
        "4",
        "--route",
        "recurrence",
        "--coeffs-out",
        path_str(&field),
    ]);
    assert_eq!(code(&out), 0);
    let mut f: Value = serde_json::from_str(&std::fs::read_to_string(&field).unwrap()).unwrap();
    let a = f["a"][2][1].as_f64().unwrap();
    f["a"][2][1] = serde_json::json!(a + 1e-2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, f.to_string()).unwrap();

    let out = moplat(&["lax", "--field", path_str(&bad)]);
    assert_ne!(code(&out), 0);
    let r = report(&out);
    assert!(residual(&r, "zero_curvature") > 1e-3);

    let clean = moplat(&["lax", "--field", path_str(&field)]);
    assert_eq!(code(&clean), 0);
}

#[test]
fn reconstruct_meixner_and_degenerate_families() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("cd.json");
    let out = moplat(&[
        "reconstruct",
        "--family",
        "meixner1",
        "--window",
        "4",
        "4",
        "--out",
        path_str(&out_file),
    ]);
    assert_eq!(code(&out), 0);
    assert!(residual(&report(&out), "reference_error") < 1e-9);
    let cd: Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    // The far corner is reached by no cell.
    assert!(cd["c"][4][4].is_null());
    assert!(cd["c"][0][0].is_number());

    for family in ["hermite", "constant_toy"] {
        let out = moplat(&["reconstruct", "--family", family]);
        assert_eq!(code(&out), 5, "{family}");
        assert_eq!(report(&out)["error"]["kind"], "degenerate_system");
    }
}

#[test]
fn reconstruct_from_qab_file() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("field.json");
    moplat(&[
        "generate",
        "--family",
        "meixner1",
        "--window",
        "3",
        "3",
        "--route",
        "recurrence",
        "--coeffs-out",
        path_str(&field),
    ]);
    let out = moplat(&["reconstruct", "--input", path_str(&field)]);
    assert_eq!(code(&out), 0);

    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&moplat(&["reconstruct", "--input", path_str(&empty)])), 2);
}

#[test]
fn moments_round_trip_through_boundary_jacobi() {
    for (family, axis) in [("hermite", "1"), ("laguerre1", "1"), ("meixner1", "2")] {
        let out = moplat(&[
            "moments", "--family", family, "--axis", axis, "--order", "6", "--window", "3", "3",
        ]);
        assert_eq!(code(&out), 0, "{family}");
        assert!(residual(&report(&out), "boundary_moments") < 1e-9, "{family}");
    }
    // Order 6 needs K = 4 boundary sites; a window of 2 gives K = 3.
    let out = moplat(&[
        "moments", "--family", "hermite", "--axis", "1", "--order", "6", "--window", "2", "2",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn params_json_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    std::fs::write(
        &params,
        r#"{"family": "meixner1", "params": {"beta": 2.0, "c1": 0.25}}"#,
    )
    .unwrap();
    let r = report(&moplat(&["verify", "--params-json", path_str(&params), "--c2", "0.75"]));
    assert_eq!(r["source"]["params"]["beta"].as_f64(), Some(2.0));
    assert_eq!(r["source"]["params"]["c1"].as_f64(), Some(0.25));
    assert_eq!(r["source"]["params"]["c2"].as_f64(), Some(0.75));

    let out = moplat(&["verify", "--family", "hermite", "--alpha1", "0.5"]);
    assert_eq!(code(&out), 2);
    assert_eq!(report(&out)["error"]["kind"], "invalid_params");
}

#[test]
fn unknown_subcommand_and_missing_source_are_usage_errors() {
    assert_eq!(code(&moplat(&["bogus"])), 2);
    assert_eq!(code(&moplat(&["verify"])), 2);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "generate",
        "--family",
        "meixner1",
        "--window",
        "4",
        "4",
        "--precision",
        "extended",
    ];
    let first = moplat(&args);
    let second = moplat(&args);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn report_file_mirrors_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let rp = dir.path().join("nested/report.json");
    let out = moplat(&["lax", "--family", "hermite", "--report", path_str(&rp)]);
    assert_eq!(std::fs::read(&rp).unwrap(), out.stdout);
}
