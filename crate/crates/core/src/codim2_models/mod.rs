//! Unimodular Lie algebras with a codimension-2 abelian ideal `a`, `Ja ≠ a`.
//!
//! In an admissible frame the `D` tensor is block lower-triangular,
//! `D_α = [[E_α, 0], [V_α, Y_α]]`, and every `C` component is a function of `D`.
//! `E_α` is fixed by seven real constants `(a, b, c, c', d', σ, δ)`.

mod analysis;
mod build;
mod generate;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex_frames::{ComplexStructure, HermitianMetric, UnitaryFrame};
use crate::error::{Error, Result};
use crate::lie_core::{RealLieAlgebra, Subspace};
use crate::linalg::{c, CMat, I};

pub use analysis::{
    admissible_frame, blocks_from_frame, classify_case, verify_lemma2, AdmissibleFrame, CaseInfo,
    Lemma2Report,
};
pub use build::{build_case1, build_case2, cd_from_blocks, e_blocks, structure_from_cd};
pub use generate::{generate, generate_with, random_basis_change, GeneratorOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "NA_Generic")]
    NaGeneric,
    #[serde(rename = "NA_HalfGeneric")]
    NaHalfGeneric,
    #[serde(rename = "NA_Degenerate")]
    NaDegenerate,
    #[serde(rename = "AB_r0")]
    AbR0,
    #[serde(rename = "AB_r1_sub2")]
    AbR1Sub2,
    #[serde(rename = "AB_r1_sub3")]
    AbR1Sub3,
    #[serde(rename = "AB_r2")]
    AbR2,
}

impl CaseTag {
    pub const CONSTRUCTIBLE: [CaseTag; 6] = [
        CaseTag::NaGeneric,
        CaseTag::NaHalfGeneric,
        CaseTag::NaDegenerate,
        CaseTag::AbR0,
        CaseTag::AbR1Sub2,
        CaseTag::AbR1Sub3,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::NaGeneric => "NA_Generic",
            CaseTag::NaHalfGeneric => "NA_HalfGeneric",
            CaseTag::NaDegenerate => "NA_Degenerate",
            CaseTag::AbR0 => "AB_r0",
            CaseTag::AbR1Sub2 => "AB_r1_sub2",
            CaseTag::AbR1Sub3 => "AB_r1_sub3",
            CaseTag::AbR2 => "AB_r2",
        }
    }

    /// `g/a` non-abelian.
    pub fn is_non_abelian(&self) -> bool {
        matches!(
            self,
            CaseTag::NaGeneric | CaseTag::NaHalfGeneric | CaseTag::NaDegenerate
        )
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [CaseTag::AbR2]
            .iter()
            .chain(CaseTag::CONSTRUCTIBLE.iter())
            .find(|t| t.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown case tag {s:?}"))
    }
}

/// The real constants of the bracket relations on `span{x, y, Jx, Jy}` modulo `a_J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Scalars {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub cp: f64,
    pub dp: f64,
    pub sigma: f64,
    pub delta: f64,
}

impl Scalars {
    pub fn delta_p(&self) -> f64 {
        (1.0 - self.delta * self.delta).max(0.0).sqrt()
    }

    /// `t = √−1 δ/δ'`.
    pub fn t(&self) -> Complex64 {
        I * (self.delta / self.delta_p())
    }

    /// `q = √−1 σ/(√2 δ')`.
    pub fn q(&self) -> Complex64 {
        I * (self.sigma / (std::f64::consts::SQRT_2 * self.delta_p()))
    }

    /// `q' = (√−1 c' + 2σδ)/(√2 δ'^2)`.
    pub fn qp(&self) -> Complex64 {
        let dp2 = self.delta_p().powi(2);
        c(2.0 * self.sigma * self.delta, self.cp) / (std::f64::consts::SQRT_2 * dp2)
    }

    /// `q'' = (√−1 c' + 3σδ)/(√2 δ'^2)`.
    pub fn qpp(&self) -> Complex64 {
        let dp2 = self.delta_p().powi(2);
        c(3.0 * self.sigma * self.delta, self.cp) / (std::f64::consts::SQRT_2 * dp2)
    }

    /// `κ = √−1 b δ'/√2`.
    pub fn kappa(&self) -> Complex64 {
        I * (self.b * self.delta_p() / std::f64::consts::SQRT_2)
    }

    /// `μ = √−1 c' − c δ`.
    pub fn mu(&self) -> Complex64 {
        c(-self.c * self.delta, self.cp)
    }

    /// `λ = √(c'^2 + c^2)`.
    pub fn lambda(&self) -> f64 {
        self.cp.hypot(self.c)
    }

    /// Right-hand side of the trace relation, `√−1 (2σ − d' − c)/(√2 δ')`.
    pub fn trace_rhs(&self) -> Complex64 {
        I * ((2.0 * self.sigma - self.dp - self.c) / (std::f64::consts::SQRT_2 * self.delta_p()))
    }

    pub fn scale(&self) -> f64 {
        [self.a, self.b, self.c, self.cp, self.dp, self.sigma]
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codim2Params {
    pub n: usize,
    pub case_tag: CaseTag,
    #[serde(flatten)]
    pub scalars: Scalars,
    #[serde(rename = "V1", with = "cmat_serde")]
    pub v1: CMat,
    #[serde(rename = "V2", with = "cmat_serde")]
    pub v2: CMat,
    #[serde(rename = "Y1", with = "cmat_serde")]
    pub y1: CMat,
    #[serde(rename = "Y2", with = "cmat_serde")]
    pub y2: CMat,
}

impl Codim2Params {
    /// Parameters with zero `V` and `Y` blocks.
    pub fn minimal(n: usize, case_tag: CaseTag, scalars: Scalars) -> Self {
        let m = n.saturating_sub(2);
        Self {
            n,
            case_tag,
            scalars,
            v1: CMat::zeros(m, 2),
            v2: CMat::zeros(m, 2),
            y1: CMat::zeros(m, m),
            y2: CMat::zeros(m, m),
        }
    }
}

pub(crate) mod cmat_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::linalg::CMat;
    use crate::serde_util::{cmat_to_rows, rows_to_cmat};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&cmat_to_rows(m), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
        rows_to_cmat(&rows, ncols).ok_or_else(|| serde::de::Error::custom("ragged complex matrix"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codim2Blocks {
    #[serde(rename = "E1", serialize_with = "crate::serde_util::cmat")]
    pub e1: CMat,
    #[serde(rename = "E2", serialize_with = "crate::serde_util::cmat")]
    pub e2: CMat,
    #[serde(rename = "V1", serialize_with = "crate::serde_util::cmat")]
    pub v1: CMat,
    #[serde(rename = "V2", serialize_with = "crate::serde_util::cmat")]
    pub v2: CMat,
    #[serde(rename = "Y1", serialize_with = "crate::serde_util::cmat")]
    pub y1: CMat,
    #[serde(rename = "Y2", serialize_with = "crate::serde_util::cmat")]
    pub y2: CMat,
    pub scalars: Scalars,
    #[serde(serialize_with = "crate::serde_util::complex")]
    pub q: Complex64,
    #[serde(serialize_with = "crate::serde_util::complex")]
    pub qp: Complex64,
    #[serde(serialize_with = "crate::serde_util::complex")]
    pub qpp: Complex64,
    #[serde(serialize_with = "crate::serde_util::complex")]
    pub kappa: Complex64,
    #[serde(serialize_with = "crate::serde_util::complex")]
    pub mu: Complex64,
    pub lambda: f64,
}

impl Codim2Blocks {
    pub fn new(e1: CMat, e2: CMat, v1: CMat, v2: CMat, y1: CMat, y2: CMat, s: Scalars) -> Self {
        Self {
            e1,
            e2,
            v1,
            v2,
            y1,
            y2,
            q: s.q(),
            qp: s.qp(),
            qpp: s.qpp(),
            kappa: s.kappa(),
            mu: s.mu(),
            lambda: s.lambda(),
            scalars: s,
        }
    }

    /// Size of the `Y` blocks, `n − 2`.
    pub fn m(&self) -> usize {
        self.y1.nrows()
    }

    pub fn t(&self) -> Complex64 {
        self.scalars.t()
    }

    pub fn e(&self, alpha: usize) -> &CMat {
        if alpha == 0 {
            &self.e1
        } else {
            &self.e2
        }
    }

    pub fn v(&self, alpha: usize) -> &CMat {
        if alpha == 0 {
            &self.v1
        } else {
            &self.v2
        }
    }

    pub fn y(&self, alpha: usize) -> &CMat {
        if alpha == 0 {
            &self.y1
        } else {
            &self.y2
        }
    }
}

/// A constructed instance together with its frame data.
#[derive(Debug, Clone)]
pub struct Codim2Instance {
    pub params: Codim2Params,
    pub alg: RealLieAlgebra,
    pub j: ComplexStructure,
    pub g: HermitianMetric,
    /// Columns: `x`, `y`, then a basis of `a_J`.
    pub ideal: Subspace,
    pub frame: UnitaryFrame,
    pub blocks: Codim2Blocks,
}

pub(crate) fn shape_check(p: &Codim2Params) -> Result<()> {
    let m =
        p.n.checked_sub(2)
            .ok_or_else(|| Error::Dimension("n must be at least 2".into()))?;
    let ok = p.v1.shape() == (m, 2)
        && p.v2.shape() == (m, 2)
        && p.y1.shape() == (m, m)
        && p.y2.shape() == (m, m);
    if !ok {
        return Err(Error::Dimension(format!(
            "blocks must be V: {m}x2, Y: {m}x{m} for n = {}",
            p.n
        )));
    }
    if !(p.scalars.delta.abs() < 1.0) {
        return Err(Error::ParameterRelation {
            relation: "|delta| < 1".into(),
            residual: p.scalars.delta.abs(),
        });
    }
    Ok(())
}
