use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hermlie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hermlie"))
        .args(args)
        .output()
        .expect("spawn hermlie")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn gen_doc(dir: &Path, case: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("{case}_{n}_{seed}.json"));
    let out = hermlie(&[
        "gen",
        "--case",
        case,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn gen_writes_a_document() {
    let out = hermlie(&["gen", "--case", "NA_Degenerate", "--n", "3", "--seed", "4"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["dim"], 6);
    assert_eq!(doc["schema_version"], "1");
    assert_eq!(doc["params"]["case_tag"], "NA_Degenerate");
    assert_eq!(doc["ideal_basis"].as_array().unwrap().len(), 4);
    assert_eq!(doc["provenance"]["seed"], 4);

    // same seed, same bytes
    let again = hermlie(&["gen", "--case", "NA_Degenerate", "--n", "3", "--seed", "4"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn gen_refusals() {
    let out = hermlie(&["gen", "--case", "AB_r2", "--n", "3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no constructor: r0 = 2 unsupported"));

    for n in ["2", "13"] {
        assert_eq!(code(&hermlie(&["gen", "--case", "AB_r0", "--n", n])), 1);
    }
    assert_eq!(
        code(&hermlie(&["gen", "--case", "nonsense", "--n", "3"])),
        1
    );
    assert_eq!(code(&hermlie(&["frobnicate"])), 1);
    assert_eq!(code(&hermlie(&["--help"])), 0);
}

#[test]
fn r0_documents_have_zero_e_blocks() {
    let dir = TempDir::new().unwrap();
    let doc = read_json(&gen_doc(dir.path(), "AB_r0", 4, 8));
    let p = &doc["params"];
    for key in ["a", "b", "c", "cp", "dp", "sigma"] {
        assert!(p[key].as_f64().unwrap().abs() <= 1e-12, "{key}");
    }
}

#[test]
fn documents_round_trip() {
    let dir = TempDir::new().unwrap();
    for (case, n) in [("NA_Generic", 3), ("AB_r1_sub3", 4), ("AB_r0", 5)] {
        let path = gen_doc(dir.path(), case, n, 21);
        let text = fs::read_to_string(&path).unwrap();
        let doc = hermlie_cli::AlgebraDocument::parse(&text).unwrap();
        assert_eq!(doc.to_json(), text);
        let loaded = doc.load().unwrap();
        assert_eq!(loaded.alg.dim(), 2 * n);
    }
}

#[test]
fn check_and_classify() {
    let dir = TempDir::new().unwrap();
    let path = gen_doc(dir.path(), "AB_r1_sub2", 3, 2);
    let out = hermlie(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rep = stdout_json(&out);
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["ideal"]["case_tag"], "AB_r1_sub2");

    let out = hermlie(&["classify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let rep = stdout_json(&out);
    assert_eq!(rep["case_tag"], "AB_r1_sub2");
    assert_eq!(rep["r0"], 1);
    assert_eq!(rep["hermitian_symplectic"], false);
}

#[test]
fn decide_exit_codes() {
    let dir = TempDir::new().unwrap();

    let path = gen_doc(dir.path(), "NA_Degenerate", 3, 6);
    let out = hermlie(&["decide", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "NoHS");
    assert_eq!(v["witness"]["kind"], "TorsionNonvanishing");
    let p = &read_json(&path)["params"];
    let (sigma, delta) = (p["sigma"].as_f64().unwrap(), p["delta"].as_f64().unwrap());
    let want = 2.0 * sigma.abs() / (2f64.sqrt() * (1.0 - delta * delta).sqrt());
    let got = v["witness"]["data"]["abs"].as_f64().unwrap();
    assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");

    let path = gen_doc(dir.path(), "AB_r0", 4, 6);
    let out = hermlie(&["decide", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["outcome"], "KahlerDeformation");
    assert!(v["deformation"]["kahler_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn half_generic_torsion_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let path = gen_doc(dir.path(), "NA_HalfGeneric", 3, 1);
    let out = hermlie(&["decide", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let data = &stdout_json(&out)["witness"]["data"];
    let p = &read_json(&path)["params"];
    let (sigma, delta) = (p["sigma"].as_f64().unwrap(), p["delta"].as_f64().unwrap());
    let q = sigma / (2f64.sqrt() * (1.0 - delta * delta).sqrt());
    let t = data["T1_12"].as_array().unwrap();
    assert!(t[0].as_f64().unwrap().abs() <= 1e-12);
    assert!((t[1].as_f64().unwrap().abs() - q.abs()).abs() <= 1e-9 * q.abs());
    assert!(data["mismatch"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn j_invariant_ideal_is_rejected() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ja.json");
    let zero = vec![vec![vec![0.0; 4]; 4]; 4];
    let doc = serde_json::json!({
        "schema_version": "1",
        "dim": 4,
        "f": zero,
        "J": [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]],
        "g": [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        "ideal_basis": [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
    });
    fs::write(&path, doc.to_string()).unwrap();
    let out = hermlie(&["decide", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Ja = a"));
}

#[test]
fn deform_writes_a_kahler_document() {
    let dir = TempDir::new().unwrap();
    let path = gen_doc(dir.path(), "AB_r0", 4, 3);
    let target = dir.path().join("kahler.json");
    let out = hermlie(&[
        "deform",
        path.to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["metric"]["kahler"], true);

    let out = hermlie(&["classify", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["metric"]["kahler"], true);
    let out = hermlie(&["decide", target.to_str().unwrap()]);
    assert_eq!(stdout_json(&out)["outcome"], "AlreadyKahler");
}

fn write_spec(dir: &Path, spec: &str) -> PathBuf {
    let p = dir.join("spec.json");
    fs::write(&p, spec).unwrap();
    p
}

#[test]
fn batch_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"[{"case": "NA_Generic", "n": 3, "seeds": [0, 4]},
            {"case": "AB_r0", "n": 4, "seeds": [0, 4]},
            {"case": "AB_r1_sub3", "n": 3, "seed": 7}]"#,
    );
    let mut summaries = Vec::new();
    for (k, jobs) in ["1", "4", "4"].iter().enumerate() {
        let out_dir = dir.path().join(format!("run{k}"));
        let out = hermlie(&[
            "batch",
            spec.to_str().unwrap(),
            "--jobs",
            jobs,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let summary = fs::read(out_dir.join("summary.json")).unwrap();
        assert_eq!(summary, out.stdout);
        assert!(out_dir.join("AB_r0_n4_s2.json").exists());
        summaries.push(summary);
    }
    assert_eq!(summaries[0], summaries[1]);
    assert_eq!(summaries[1], summaries[2]);
    let s: Value = serde_json::from_slice(&summaries[0]).unwrap();
    assert_eq!(s["instances"], 9);
    assert_eq!(s["counts"]["KahlerDeformation"], 4);
    assert_eq!(s["flagged"], 0);
}

#[test]
fn empty_batch_is_fine() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(dir.path(), "[]");
    let out = hermlie(&["batch", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let s = stdout_json(&out);
    assert_eq!(s["instances"], 0);
    assert!(s["failures"].as_array().unwrap().is_empty());
}

#[test]
fn batch_failures_are_reported() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"[{"case": "AB_r2", "n": 3, "seed": 0}, {"case": "AB_r0", "n": 3, "seed": 0}]"#,
    );
    let out = hermlie(&["batch", spec.to_str().unwrap()]);
    assert_ne!(code(&out), 0);
    let s = stdout_json(&out);
    assert_eq!(s["failures"].as_array().unwrap().len(), 1);
    assert_eq!(s["counts"]["error"], 1);

    let bad = write_spec(dir.path(), r#"{"nope": 1}"#);
    assert_eq!(code(&hermlie(&["batch", bad.to_str().unwrap()])), 1);
}
