//! Decision procedure: either an obstruction to Hermitian-symplectic metrics or an
//! explicit Kähler metric.
//!
//! The input is a unimodular `(g, J, g)` with a codimension-2 abelian ideal `a`,
//! `Ja ≠ a`. When the linear system for `S` is infeasible the verdict carries a
//! named witness; when it is feasible (only for `r₀ = 0`) the `V` blocks are
//! removed by a frame change and the resulting metric is checked to be Kähler.

mod deform;
mod lemma3;

use num_complex::Complex64;
use serde::Serialize;

use crate::codim2_models::{classify_case, CaseTag};
use crate::complex_frames::{torsion_tensor, ComplexStructure, FormTerm, HermitianMetric};
use crate::error::{Error, Result};
use crate::lie_core::{is_unimodular, RealLieAlgebra, Subspace};
use crate::metric_classifier::{classify_metric, hs_solve, positive_exact_obstruction, HsOutcome};

pub use deform::{deform_to_kahler, subcase_unitary_change, DeformationResult, SubcaseChange};
pub use lemma3::{lemma3_residuals, Lemma3Certificate, Lemma3Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    NoHS,
    KahlerDeformation,
    AlreadyKahler,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", content = "data")]
pub enum Witness {
    /// `T¹₁₂ ≠ 0` although every Hermitian-symplectic metric would force it to vanish.
    TorsionNonvanishing {
        #[serde(rename = "T1_12", serialize_with = "crate::serde_util::complex")]
        t112: Complex64,
        /// `q` for half-generic, `2q` for degenerate.
        #[serde(serialize_with = "crate::serde_util::complex")]
        closed_form: Complex64,
        abs: f64,
        mismatch: f64,
    },
    /// The trace relation forces `d' = 2σ − c`, the bracket constants give another value.
    GenericTraceClash {
        sigma: f64,
        c: f64,
        dp: f64,
        dp_forced: f64,
        gap: f64,
    },
    /// `√−1 φ₁∧φ̄₁ = dβ` after the unitary change of the first two frame vectors.
    PositiveExactForm {
        index: usize,
        beta: Vec<FormTerm>,
        residual: f64,
        change: SubcaseChange,
    },
    /// Infeasible linear system with no structural obstruction found.
    LinearInfeasibility { min_residual: f64, tol: f64 },
}

impl Witness {
    pub fn kind(&self) -> &'static str {
        match self {
            Witness::TorsionNonvanishing { .. } => "TorsionNonvanishing",
            Witness::GenericTraceClash { .. } => "GenericTraceClash",
            Witness::PositiveExactForm { .. } => "PositiveExactForm",
            Witness::LinearInfeasibility { .. } => "LinearInfeasibility",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub case_tag: CaseTag,
    pub r0: Option<usize>,
    /// Relative residual of the linear system for `S`.
    pub hs_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationResult>,
    /// Set when the outcome is not one of the expected ones for the case.
    pub flagged: bool,
}

/// Runs the full procedure on `(alg, J, g)` with the abelian ideal `ideal`.
pub fn decide(
    alg: &RealLieAlgebra,
    ideal: &Subspace,
    j: &ComplexStructure,
    g: &HermitianMetric,
    tol: f64,
) -> Result<Verdict> {
    let uni = is_unimodular(alg, 1e-9 * alg.scale());
    if !uni.flag {
        return Err(Error::NotUnimodular(uni.residual));
    }
    let info = classify_case(alg, ideal, j, g)?;
    let af = &info.admissible;
    let frame = &af.frame;
    let blocks = &af.blocks;
    let s = af.scalars;
    let hs = hs_solve(frame, tol);
    let mut verdict = Verdict {
        outcome: Outcome::NoHS,
        case_tag: info.tag,
        r0: info.r0,
        hs_residual: hs.relative_residual(),
        witness: None,
        deformation: None,
        flagged: false,
    };

    if let HsOutcome::Feasible(cert) = &hs {
        if classify_metric(frame, tol).kahler {
            verdict.outcome = Outcome::AlreadyKahler;
            return Ok(verdict);
        }
        if info.tag != CaseTag::AbR0 {
            return Err(Error::UnexpectedFeasibility(info.tag.to_string()));
        }
        let l3 = Lemma3Certificate::from_full(&cert.s, blocks)?;
        let def = deform_to_kahler(frame, blocks, &l3, tol.max(1e-9))?;
        verdict.outcome = Outcome::KahlerDeformation;
        verdict.deformation = Some(def);
        return Ok(verdict);
    }

    let clash_tol = tol.max(1e-9) * s.scale();
    let witness = if info.tag.is_non_abelian() {
        let forced = 2.0 * s.sigma - s.c;
        if (s.dp - forced).abs() > clash_tol {
            trace_clash(s.sigma, s.c, s.dp, forced)
        } else {
            let mult = match info.tag {
                CaseTag::NaDegenerate => 2.0,
                CaseTag::NaHalfGeneric => 1.0,
                _ => {
                    verdict.flagged = true;
                    0.0
                }
            };
            if mult == 0.0 {
                infeasible(&hs)
            } else {
                let t112 = torsion_tensor(frame).get(0, 0, 1);
                let closed = blocks.q * mult;
                Witness::TorsionNonvanishing {
                    t112,
                    closed_form: closed,
                    abs: t112.norm(),
                    mismatch: (t112 - closed).norm(),
                }
            }
        }
    } else if (s.c + s.dp).abs() > clash_tol {
        trace_clash(0.0, s.c, s.dp, -s.c)
    } else {
        match info.tag {
            CaseTag::AbR1Sub2 | CaseTag::AbR1Sub3 => {
                let change = subcase_unitary_change(frame, blocks, info.tag)?;
                match positive_exact_obstruction(&change.frame, tol.max(1e-9)) {
                    Some(w) => Witness::PositiveExactForm {
                        index: w.index,
                        beta: w.beta.to_terms(),
                        residual: w.residual,
                        change,
                    },
                    None => {
                        verdict.flagged = true;
                        infeasible(&hs)
                    }
                }
            }
            _ => {
                verdict.flagged = true;
                infeasible(&hs)
            }
        }
    };
    verdict.witness = Some(witness);
    Ok(verdict)
}

fn trace_clash(sigma: f64, c: f64, dp: f64, forced: f64) -> Witness {
    Witness::GenericTraceClash {
        sigma,
        c,
        dp,
        dp_forced: forced,
        gap: (dp - forced).abs(),
    }
}

fn infeasible(hs: &HsOutcome) -> Witness {
    match hs {
        HsOutcome::Infeasible(r) => Witness::LinearInfeasibility {
            min_residual: r.min_residual,
            tol: r.tol,
        },
        HsOutcome::Feasible(c) => Witness::LinearInfeasibility {
            min_residual: c.eq_residual,
            tol: c.tol,
        },
    }
}
