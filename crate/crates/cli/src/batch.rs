//! Many `(case, n, seed)` instances through generate → document → decide.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use hermlie::codim2_models::{generate, CaseTag};
use hermlie::metric_classifier::classify_metric;
use hermlie::st_pipeline::{Outcome, Verdict, Witness};

use crate::commands::{
    decide_document, exit_code, verdict_code, write_file, Globals, EXIT_ERROR, EXIT_OK,
};
use crate::document::AlgebraDocument;
use crate::json;

/// One line of a batch spec: a single `seed` or a half-open range `seeds: [from, to]`.
#[derive(Debug, Clone, Deserialize)]
pub struct SpecEntry {
    pub case: CaseTag,
    pub n: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seeds: Option<[u64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SpecFile {
    List(Vec<SpecEntry>),
    Wrapped { instances: Vec<SpecEntry> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Job {
    pub seed: u64,
    pub case: CaseTag,
    pub n: usize,
}

impl Job {
    fn file_name(&self) -> String {
        format!("{}_n{}_s{}.json", self.case, self.n, self.seed)
    }
}

pub fn parse_spec(text: &str) -> Result<Vec<Job>> {
    let entries = match serde_json::from_str::<SpecFile>(text).context("malformed batch spec")? {
        SpecFile::List(v) => v,
        SpecFile::Wrapped { instances } => instances,
    };
    let mut jobs = Vec::new();
    for e in entries {
        match (e.seed, e.seeds) {
            (Some(seed), None) => jobs.push(Job {
                seed,
                case: e.case,
                n: e.n,
            }),
            (None, Some([from, to])) => jobs.extend((from..to).map(|seed| Job {
                seed,
                case: e.case,
                n: e.n,
            })),
            _ => anyhow::bail!(
                "spec entry {} n={} needs exactly one of seed, seeds",
                e.case,
                e.n
            ),
        }
    }
    jobs.sort();
    jobs.dedup();
    Ok(jobs)
}

#[derive(Debug, Clone, Serialize)]
pub struct JobResult {
    #[serde(flatten)]
    pub job: Job,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    /// `classify_metric` of the deformed metric.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deformed_kahler: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn run_job(job: Job, tol: f64) -> JobResult {
    let attempt = || -> Result<(Verdict, Option<bool>)> {
        let inst = generate(job.case, job.n, job.seed)?;
        let doc = AlgebraDocument::from_instance(&inst, job.seed);
        let v = decide_document(&doc, tol)?;
        let k = v
            .deformation
            .as_ref()
            .map(|d| classify_metric(&d.new_frame, tol).kahler);
        Ok((v, k))
    };
    match attempt() {
        Ok((v, k)) => JobResult {
            job,
            exit_code: verdict_code(&v),
            verdict: Some(v),
            deformed_kahler: k,
            error: None,
        },
        Err(e) => JobResult {
            job,
            exit_code: exit_code(&e),
            verdict: None,
            deformed_kahler: None,
            error: Some(format!("{e:#}")),
        },
    }
}

fn label(r: &JobResult) -> String {
    match &r.verdict {
        None => "error".to_string(),
        Some(v) => match (&v.outcome, &v.witness) {
            (Outcome::NoHS, Some(w)) => format!("NoHS/{}", w.kind()),
            (o, _) => format!("{o:?}"),
        },
    }
}

#[derive(Debug, Default, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub counts: BTreeMap<String, usize>,
    pub counts_by_case: BTreeMap<String, BTreeMap<String, usize>>,
    pub max_residuals: BTreeMap<String, f64>,
    pub flagged: usize,
    pub failures: Vec<serde_json::Value>,
}

pub fn summarize(results: &[JobResult]) -> Summary {
    let mut s = Summary {
        instances: results.len(),
        ..Summary::default()
    };
    let mut bump = |key: &str, v: f64| {
        let e = s.max_residuals.entry(key.to_string()).or_insert(0.0);
        *e = e.max(v);
    };
    let mut counts = BTreeMap::new();
    let mut by_case: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut flagged = 0;
    let mut failures = Vec::new();
    for r in results {
        let l = label(r);
        *counts.entry(l.clone()).or_insert(0) += 1;
        *by_case
            .entry(r.job.case.to_string())
            .or_default()
            .entry(l)
            .or_insert(0) += 1;
        if let Some(e) = &r.error {
            failures
                .push(json!({"case": r.job.case, "n": r.job.n, "seed": r.job.seed, "error": e}));
        }
        let Some(v) = &r.verdict else { continue };
        flagged += v.flagged as usize;
        if v.outcome != Outcome::NoHS {
            bump("hs_residual_feasible", v.hs_residual);
        }
        match &v.witness {
            Some(Witness::TorsionNonvanishing { mismatch, .. }) => {
                bump("torsion_mismatch", *mismatch)
            }
            Some(Witness::PositiveExactForm {
                residual, change, ..
            }) => {
                bump("exact_form", *residual);
                bump("subcase_pattern", change.pattern_residual);
            }
            _ => {}
        }
        if let Some(d) = &v.deformation {
            bump("v_tilde", d.v_tilde);
            bump("kahler", d.kahler_residual);
            bump("image", d.image_residual);
        }
    }
    s.counts = counts;
    s.counts_by_case = by_case;
    s.flagged = flagged;
    s.failures = failures;
    s
}

/// Runs the spec; with `--out`, one verdict file per instance plus `summary.json`.
pub fn cmd_batch(g: &Globals, spec: &Path) -> Result<u8> {
    let text = fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?;
    let jobs = parse_spec(&text)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(g.jobs.unwrap_or(0))
        .build()
        .context("building thread pool")?;
    let tol = g.tol;
    let results: Vec<JobResult> =
        pool.install(|| jobs.par_iter().map(|&j| run_job(j, tol)).collect());
    let summary = summarize(&results);
    let text = json::to_string(&summary)?;
    if let Some(dir) = &g.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &results {
            write_file(&dir.join(r.job.file_name()), &json::to_string(r)?)?;
        }
        write_file(&dir.join("summary.json"), &text)?;
    }
    print!("{text}");
    Ok(if summary.failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_ERROR
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_forms() {
        let a = parse_spec(
            r#"[{"case": "AB_r0", "n": 3, "seeds": [0, 3]}, {"case": "AB_r0", "n": 3, "seed": 1}]"#,
        )
        .unwrap();
        assert_eq!(a.len(), 3);
        let b =
            parse_spec(r#"{"instances": [{"case": "NA_Degenerate", "n": 4, "seed": 9}]}"#).unwrap();
        assert_eq!(
            b,
            vec![Job {
                seed: 9,
                case: CaseTag::NaDegenerate,
                n: 4
            }]
        );
        assert!(parse_spec(r#"[{"case": "AB_r0", "n": 3}]"#).is_err());
        assert!(parse_spec("[]").unwrap().is_empty());
    }

    #[test]
    fn jobs_sort_by_seed_first() {
        let jobs = parse_spec(
            r#"[{"case": "AB_r0", "n": 4, "seed": 2}, {"case": "NA_Generic", "n": 3, "seed": 1}]"#,
        )
        .unwrap();
        assert_eq!(jobs[0].seed, 1);
    }
}
