use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use hermlie::codim2_models::{classify_case, generate, CaseTag};
use hermlie::complex_frames::{build_unitary_frame, check_integrability};
use hermlie::lie_core::{
    derived_series, is_unimodular, validate_structure_constants, verify_abelian_ideal,
};
use hermlie::linalg;
use hermlie::metric_classifier::{classify_metric, hs_solve};
use hermlie::st_pipeline::{decide, Outcome, Verdict};

use crate::document::AlgebraDocument;
use crate::json;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_SAMPLING: u8 = 2;
pub const EXIT_NO_HS: u8 = 3;

/// Values of the global flags.
#[derive(Debug, Clone)]
pub struct Globals {
    pub tol: f64,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for Globals {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: None,
            out: None,
            jobs: None,
        }
    }
}

/// Exit status for an error: 2 for generator failures, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let lib = err.chain().find_map(|e| e.downcast_ref::<hermlie::Error>());
    match lib {
        Some(hermlie::Error::Generation(_)) | Some(hermlie::Error::UnsupportedTag) => EXIT_SAMPLING,
        _ => EXIT_ERROR,
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Prints `value` and, with `--out`, writes the same text to that file.
fn report<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = json::to_string(value)?;
    print!("{text}");
    if let Some(p) = out {
        write_file(p, &text)?;
    }
    Ok(())
}

pub const GEN_N_RANGE: std::ops::RangeInclusive<usize> = 3..=12;

pub fn cmd_gen(g: &Globals, tag: CaseTag, n: usize) -> Result<u8> {
    ensure!(
        GEN_N_RANGE.contains(&n),
        "n must lie in {}..={}, got {n}",
        GEN_N_RANGE.start(),
        GEN_N_RANGE.end()
    );
    let seed = g.seed.unwrap_or(0);
    let inst = generate(tag, n, seed)?;
    let text = AlgebraDocument::from_instance(&inst, seed).to_json();
    match &g.out {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

pub fn cmd_check(g: &Globals, input: &Path) -> Result<u8> {
    let doc = AlgebraDocument::read(input)?;
    let tol = g.tol;
    let mut pass = true;
    let mut out = serde_json::Map::new();
    out.insert("dim".into(), json!(doc.dim));

    let alg = hermlie::lie_core::RealLieAlgebra::from_nested(&doc.f)?;
    let s = alg.scale().max(1.0);
    let structure = validate_structure_constants(&alg, tol * s * s)?;
    pass &= structure.pass;
    out.insert("structure".into(), serde_json::to_value(&structure)?);

    let uni = is_unimodular(&alg, tol * s);
    pass &= uni.flag;
    out.insert("unimodular".into(), serde_json::to_value(uni)?);
    out.insert(
        "derived_series".into(),
        serde_json::to_value(derived_series(&alg, 1e-10))?,
    );

    match doc.load() {
        Ok(loaded) => {
            let jmax = linalg::max_abs(loaded.j.matrix()).max(1.0);
            let integ = check_integrability(&loaded.alg, &loaded.j, tol * s * jmax * jmax)?;
            pass &= integ.flag;
            out.insert("integrability".into(), serde_json::to_value(integ)?);
            out.insert(
                "metric".into(),
                json!({"compatible": true, "positive_definite": true}),
            );
            if let Some(ideal) = &loaded.ideal {
                let rep = verify_abelian_ideal(&loaded.alg, ideal, tol * s)?;
                pass &= rep.is_ideal && rep.is_abelian;
                let mut entry = serde_json::to_value(rep)?;
                entry["dim"] = json!(ideal.dim());
                match classify_case(&loaded.alg, ideal, &loaded.j, &loaded.g) {
                    Ok(info) => entry["case_tag"] = json!(info.tag),
                    Err(e) => {
                        pass = false;
                        entry["error"] = json!(e.to_string());
                    }
                }
                out.insert("ideal".into(), entry);
            }
        }
        Err(e) => {
            pass = false;
            out.insert("error".into(), json!(format!("{e:#}")));
        }
    }
    out.insert("tol".into(), json!(tol));
    out.insert("pass".into(), json!(pass));
    report(&Value::Object(out), g.out.as_deref())?;
    Ok(if pass { EXIT_OK } else { EXIT_ERROR })
}

pub fn cmd_classify(g: &Globals, input: &Path) -> Result<u8> {
    let loaded = AlgebraDocument::read(input)?.load()?;
    let frame = build_unitary_frame(&loaded.alg, &loaded.j, &loaded.g)?;
    let mut out = json!({
        "metric": classify_metric(&frame, g.tol),
        "hermitian_symplectic": hs_solve(&frame, g.tol).is_feasible(),
    });
    if let Some(ideal) = &loaded.ideal {
        let info = classify_case(&loaded.alg, ideal, &loaded.j, &loaded.g)?;
        out["case_tag"] = json!(info.tag);
        out["r0"] = json!(info.r0);
        out["dims"] = serde_json::to_value(&info.dims)?;
        out["scalars"] = serde_json::to_value(info.admissible.scalars)?;
    }
    report(&out, g.out.as_deref())?;
    Ok(EXIT_OK)
}

pub(crate) fn verdict_code(v: &Verdict) -> u8 {
    match v.outcome {
        Outcome::NoHS => EXIT_NO_HS,
        Outcome::KahlerDeformation | Outcome::AlreadyKahler => EXIT_OK,
    }
}

pub fn decide_document(doc: &AlgebraDocument, tol: f64) -> Result<Verdict> {
    let loaded = doc.load()?;
    Ok(decide(
        &loaded.alg,
        loaded.ideal()?,
        &loaded.j,
        &loaded.g,
        tol,
    )?)
}

pub fn cmd_decide(g: &Globals, input: &Path) -> Result<u8> {
    let verdict = decide_document(&AlgebraDocument::read(input)?, g.tol)?;
    report(&verdict, g.out.as_deref())?;
    Ok(verdict_code(&verdict))
}

/// Deformation report on stdout; `--out` receives the document with the Kähler metric.
pub fn cmd_deform(g: &Globals, input: &Path) -> Result<u8> {
    let doc = AlgebraDocument::read(input)?;
    let verdict = decide_document(&doc, g.tol)?;
    let code = verdict_code(&verdict);
    let new_doc = match (&verdict.outcome, &verdict.deformation) {
        (Outcome::KahlerDeformation, Some(d)) => {
            let flags = classify_metric(&d.new_frame, g.tol);
            print!(
                "{}",
                json::to_string(&json!({
                    "outcome": verdict.outcome,
                    "case_tag": verdict.case_tag,
                    "deformation": d,
                    "metric": flags,
                }))?
            );
            Some(doc.with_metric(&d.new_frame.metric()))
        }
        (Outcome::AlreadyKahler, _) => {
            print!("{}", json::to_string(&verdict)?);
            Some(doc.clone())
        }
        _ => {
            print!("{}", json::to_string(&verdict)?);
            None
        }
    };
    if let (Some(p), Some(d)) = (&g.out, new_doc) {
        write_file(p, &d.to_json())?;
    }
    Ok(code)
}
