//! Unitary frame changes of the rank-one subcases and the Kähler deformation.

use serde::Serialize;

use super::lemma3::{lemma3_residuals, Lemma3Certificate};
use crate::codim2_models::{blocks_from_frame, CaseTag, Codim2Blocks};
use crate::complex_frames::{ce_differential, InvariantForm, UnitaryFrame};
use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat, CVec};

#[derive(Debug, Clone, Serialize)]
pub struct SubcaseChange {
    #[serde(rename = "U", serialize_with = "crate::serde_util::cmat")]
    pub u: CMat,
    #[serde(rename = "E1", serialize_with = "crate::serde_util::cmat")]
    pub e1: CMat,
    #[serde(rename = "E2", serialize_with = "crate::serde_util::cmat")]
    pub e2: CMat,
    /// Largest `Ẽ` entry other than `D¹₂₁`.
    pub pattern_residual: f64,
    /// `|C¹₁₂| + |C²₁₂|` in the new frame.
    pub c12: f64,
    #[serde(skip)]
    pub frame: UnitaryFrame,
}

/// `[ẽ₁, ẽ₂]ᵀ = U [e₁, e₂]ᵀ`, after which `D¹₂₁` is the only nonzero entry of `Ẽ₁, Ẽ₂`.
pub fn subcase_unitary_change(
    frame: &UnitaryFrame,
    blocks: &Codim2Blocks,
    tag: CaseTag,
) -> Result<SubcaseChange> {
    let s = blocks.scalars;
    let dl = s.delta_p();
    let t = s.t();
    let u = match tag {
        CaseTag::AbR1Sub2 => CMat::from_row_slice(2, 2, &[cr(1.0), t, t, cr(1.0)]) * cr(dl),
        CaseTag::AbR1Sub3 => {
            let mu = s.mu();
            let icd = c(0.0, s.c * dl);
            CMat::from_row_slice(2, 2, &[icd, mu, -mu.conj(), -icd]) / cr(s.lambda())
        }
        other => {
            return Err(Error::Precondition(format!(
                "subcase change needs AB_r1_sub2 or AB_r1_sub3, got {other}"
            )))
        }
    };
    let unit = linalg::max_abs_c(&(&u * u.adjoint() - CMat::identity(2, 2)));
    if !(unit <= 1e-10) {
        return Err(Error::NonUnitary(unit));
    }
    let n = frame.n();
    let mut w = CMat::identity(n, n);
    w.view_mut((0, 0), (2, 2)).copy_from(&u);
    let moved = frame.transform(&w)?;
    let b = blocks_from_frame(&moved, s);
    let mut pattern: f64 = b.e2.iter().fold(0.0, |m, z| m.max(z.norm()));
    for (i, j) in [(0, 0), (0, 1), (1, 1)] {
        pattern = pattern.max(b.e1[(i, j)].norm());
    }
    let c12 = moved.c().get(0, 0, 1).norm() + moved.c().get(1, 0, 1).norm();
    Ok(SubcaseChange {
        u,
        e1: b.e1,
        e2: b.e2,
        pattern_residual: pattern,
        c12,
        frame: moved,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationResult {
    #[serde(serialize_with = "crate::serde_util::cvec")]
    pub a1: CVec,
    #[serde(serialize_with = "crate::serde_util::cvec")]
    pub a2: CVec,
    #[serde(rename = "Lambda1")]
    pub lambda1: Vec<f64>,
    #[serde(rename = "Lambda2")]
    pub lambda2: Vec<f64>,
    #[serde(rename = "U_diag", serialize_with = "crate::serde_util::cmat")]
    pub u_diag: CMat,
    /// Largest `|v + Y ā|` over the four columns `v^β_α`.
    pub image_residual: f64,
    /// `max |ṽ^β_α|` in the new frame.
    pub v_tilde: f64,
    /// `max |Ỹ_α − Λ-form of Y_α|`.
    pub y_tilde: f64,
    /// `‖dω̃‖`.
    pub kahler_residual: f64,
    #[serde(skip)]
    pub new_frame: UnitaryFrame,
}

/// Eigenvalues within `gap` of each other form one cluster.
fn clusters(vals: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=vals.len() {
        if k == vals.len() || vals[k] - vals[k - 1] > gap {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// `Q` with `Q* Y₁ Q = Λ₁` and `Q* (Y₂ + tY₁) Q = Λ₂`, both real diagonal.
fn simultaneous_diagonalization(
    y1: &CMat,
    y2: &CMat,
    t: num_complex::Complex64,
    scale: f64,
) -> (CMat, Vec<f64>, Vec<f64>) {
    let m = y1.nrows();
    let herm = |a: &CMat| (a + a.adjoint()) * cr(0.5);
    let (l1, q1) = linalg::hermitian_eigh(&herm(y1));
    let h2 = herm(&(y2 + y1 * t));
    let mut q = CMat::zeros(m, m);
    for r in clusters(&l1, 1e-8 * scale) {
        let k = r.len();
        let basis = q1.columns(r.start, k).into_owned();
        let (_, inner) = linalg::hermitian_eigh(&(basis.adjoint() * &h2 * &basis));
        q.columns_mut(r.start, k).copy_from(&(basis * inner));
    }
    linalg::fix_phases(&mut q);
    let d1 = q.adjoint() * y1 * &q;
    let d2 = q.adjoint() * h2 * &q;
    let lambda1 = (0..m).map(|i| d1[(i, i)].re).collect();
    let lambda2 = (0..m).map(|i| d2[(i, i)].re).collect();
    (q, lambda1, lambda2)
}

/// Frame change `ẽ_α = e_α + Σ_i a_{αi} e_i`, which removes the `V` blocks and leaves a
/// Kähler metric. With `D^j_{ik}` the `ē_i`-coefficient of `[ē_j, e_k]` the blocks move as
/// `ṽ^β_α = v^β_α + Y_α ā_β`, so `ā_β` solves `Y_α ā_β = −v^β_α`.
pub fn deform_to_kahler(
    frame: &UnitaryFrame,
    blocks: &Codim2Blocks,
    cert: &Lemma3Certificate,
    tol: f64,
) -> Result<DeformationResult> {
    let n = frame.n();
    let m = blocks.m();
    let t = blocks.t();
    let e_size = linalg::max_abs_c(&blocks.e1).max(linalg::max_abs_c(&blocks.e2));
    if e_size > tol {
        return Err(Error::Precondition(format!(
            "deformation needs E₁ = E₂ = 0 (r₀ = 0), found {e_size:.3e}"
        )));
    }
    let scale = [&blocks.y1, &blocks.y2, &blocks.v1, &blocks.v2]
        .iter()
        .fold(1.0f64, |a, b| a.max(linalg::max_abs_c(b)));
    let comm = linalg::max_abs_c(&linalg::commutator(&blocks.y1, &blocks.y2));
    if comm > tol * scale * scale {
        return Err(Error::NonCommuting(comm));
    }
    let rep = lemma3_residuals(blocks, cert, t, tol * scale * scale)?;
    if !rep.pass {
        let (name, worst) = rep
            .residuals
            .iter()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("six residuals");
        return Err(Error::Precondition(format!(
            "certificate fails {name} (residual {worst:.3e})"
        )));
    }

    let (q, lambda1, lambda2) = simultaneous_diagonalization(&blocks.y1, &blocks.y2, t, scale);
    // Ỹ = W Y W* for ẽ_i = Σ_k W_{ik} e_k on the last n − 2 vectors
    let mut w = CMat::identity(n, n);
    w.view_mut((2, 2), (m, m)).copy_from(&q.adjoint());
    let diag_frame = frame.transform(&w)?;
    let db = blocks_from_frame(&diag_frame, blocks.scalars);

    // componentwise least squares on the stacked diagonal system (λ₁, λ₂ − tλ₁)
    let cut = 1e-10 * scale;
    let mut abar = [CVec::zeros(m), CVec::zeros(m)];
    let mut image_residual: f64 = 0.0;
    for (beta, ab) in abar.iter_mut().enumerate() {
        for i in 0..m {
            let y_1 = db.y1[(i, i)];
            let y_2 = db.y2[(i, i)];
            let v_1 = -db.v1[(i, beta)];
            let v_2 = -db.v2[(i, beta)];
            let den = y_1.norm_sqr() + y_2.norm_sqr();
            let z = if den.sqrt() > cut {
                (y_1.conj() * v_1 + y_2.conj() * v_2) / den
            } else {
                cr(0.0)
            };
            ab[i] = z;
            image_residual = image_residual
                .max((v_1 - y_1 * z).norm())
                .max((v_2 - y_2 * z).norm());
        }
    }
    if image_residual > tol * scale {
        return Err(Error::NotInImage(image_residual));
    }
    let a = [abar[0].map(|z| z.conj()), abar[1].map(|z| z.conj())];
    let mut shift = CMat::identity(n, n);
    for (al, row) in a.iter().enumerate() {
        for i in 0..m {
            shift[(al, i + 2)] = row[i];
        }
    }
    let new_frame = diag_frame.transform(&shift)?;
    let nb = blocks_from_frame(&new_frame, blocks.scalars);
    let v_tilde = linalg::max_abs_c(&nb.v1).max(linalg::max_abs_c(&nb.v2));
    let y_tilde = linalg::max_abs_c(&(&nb.y1 - &db.y1)).max(linalg::max_abs_c(&(&nb.y2 - &db.y2)));
    let kahler_residual = ce_differential(&InvariantForm::kahler(n), &new_frame)?.norm();
    // a_β in the coordinates of the input frame: Σ_i a_i ẽ_i = Σ_k (Q̄ a)_k e_k
    let qbar = q.map(|z| z.conj());
    let a1 = &qbar * &a[0];
    let a2 = &qbar * &a[1];
    Ok(DeformationResult {
        a1,
        a2,
        lambda1,
        lambda2,
        u_diag: q.adjoint(),
        image_residual,
        v_tilde,
        y_tilde,
        kahler_residual,
        new_frame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_split_on_gaps() {
        assert_eq!(
            clusters(&[0.0, 1e-12, 1.0, 2.0, 2.0], 1e-8),
            vec![0..2, 2..3, 3..5]
        );
        assert!(clusters(&[], 1e-8).is_empty());
        assert_eq!(clusters(&[3.0], 1e-8), vec![0..1]);
    }
}
