//! Admissible frames, the case taxonomy and the block-structure checks.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use serde::Serialize;

use super::build::{block_relations, e_blocks};
use super::{CaseTag, Codim2Blocks, Scalars};
use crate::complex_frames::{unitarize, ComplexStructure, HermitianMetric, UnitaryFrame};
use crate::error::{Error, Result};
use crate::lie_core::{derived_algebra, verify_abelian_ideal, RealLieAlgebra, Subspace};
use crate::linalg::{self, cr, CMat, CVec, RMat, RVec, I};
use num_complex::Complex64;

/// Relative threshold for subspace containment and parameter identities.
const REL_TOL: f64 = 1e-8;

/// Subspaces `a_J ⊂ a` and, for `g/a` non-abelian, `a' = a + [g,g]` and `b = a ∩ J a'`.
struct Chain {
    a: RMat,
    a_j: RMat,
    derived: RMat,
    non_abelian: bool,
    a_prime: Option<RMat>,
    b: Option<RMat>,
    tol: f64,
}

fn chain(alg: &RealLieAlgebra, ideal: &Subspace, j: &ComplexStructure) -> Result<Chain> {
    let dim = alg.dim();
    if ideal.ambient_dim() != dim || j.dim() != dim {
        return Err(Error::Dimension(
            "algebra, ideal and J dimensions differ".into(),
        ));
    }
    if ideal.dim() + 2 != dim {
        return Err(Error::WrongCodimension(dim - ideal.dim()));
    }
    let jscale = linalg::max_abs(j.matrix()).max(1.0);
    let tol = REL_TOL * alg.scale() * jscale * jscale;
    let rep = verify_abelian_ideal(alg, ideal, tol)?;
    if !(rep.is_ideal && rep.is_abelian) {
        return Err(Error::NotAbelianIdeal {
            ideal: rep.ideal_residual,
            abelian: rep.abelian_residual,
        });
    }
    let a = ideal.orthonormal();
    let ja = linalg::column_space(&(j.matrix() * &a));
    let a_j = linalg::intersect(&a, &ja);
    if a_j.ncols() == a.ncols() {
        return Err(Error::JPreservesIdeal);
    }
    if a_j.ncols() + 2 != a.ncols() {
        return Err(Error::Precondition(format!(
            "dim(a ∩ Ja) = {}, expected {}",
            a_j.ncols(),
            a.ncols() - 2
        )));
    }
    let derived = derived_algebra(alg);
    let a_prime = linalg::sum(&a, &derived);
    let non_abelian = a_prime.ncols() > a.ncols();
    let (a_prime, b) = if non_abelian {
        let ja_prime = linalg::column_space(&(j.matrix() * &a_prime));
        let b = linalg::intersect(&a, &ja_prime);
        if b.ncols() + 1 != a.ncols() {
            return Err(Error::Precondition(format!(
                "dim b = {}, expected {}",
                b.ncols(),
                a.ncols() - 1
            )));
        }
        (Some(a_prime), Some(b))
    } else {
        (None, None)
    };
    Ok(Chain {
        a,
        a_j,
        derived,
        non_abelian,
        a_prime,
        b,
        tol,
    })
}

/// Max distance of the brackets `[u_i, w_k]` from `span(space)`.
fn bracket_excess(alg: &RealLieAlgebra, u: &RMat, w: &RMat, space: &RMat) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..u.ncols() {
        let ui = u.column(i).into_owned();
        for k in 0..w.ncols() {
            let br = alg.bracket(&ui, &w.column(k).into_owned());
            worst = worst.max(linalg::distance_to_span(space, &br));
        }
    }
    worst
}

fn g_normalize(v: RVec, g: &RMat) -> RVec {
    let nrm = linalg::g_dot(g, &v, &v).max(0.0).sqrt();
    v / nrm
}

fn first_significant_positive(v: RVec) -> RVec {
    let scale = v.amax();
    match v.iter().find(|c| c.abs() > 1e-8 * scale) {
        Some(&c) if c < 0.0 => -v,
        _ => v,
    }
}

#[derive(Debug, Clone)]
pub struct AdmissibleFrame {
    pub frame: UnitaryFrame,
    pub x: RVec,
    pub y: RVec,
    pub scalars: Scalars,
    pub blocks: Codim2Blocks,
    pub non_abelian: bool,
}

impl AdmissibleFrame {
    pub fn delta(&self) -> f64 {
        self.scalars.delta
    }
}

/// Admissible frame of `(alg, J, g)` relative to the ideal.
///
/// Signs: the first significant coordinate of `x` is positive; `y` is flipped so
/// that `δ > 0`, or, when `δ = 0`, so that its first significant coordinate is positive.
/// In the abelian-quotient case `x` spans the kernel of `v ↦ tr(ad_{Jv}|_V)`; when that
/// functional vanishes, `x` is the projection of the first ideal basis vector onto `V`.
pub fn admissible_frame(
    alg: &RealLieAlgebra,
    ideal: &Subspace,
    j: &ComplexStructure,
    g: &HermitianMetric,
) -> Result<AdmissibleFrame> {
    let ch = chain(alg, ideal, j)?;
    let gm = g.matrix();
    let jm = j.matrix();
    let (x, y) = if ch.non_abelian {
        let b = ch.b.as_ref().expect("non-abelian chain has b");
        let xs = linalg::orth_complement_within(b, &ch.a_j, gm);
        let ys = linalg::orth_complement_within(&ch.a, b, gm);
        if xs.ncols() != 1 || ys.ncols() != 1 {
            return Err(Error::Precondition("x, y directions are not unique".into()));
        }
        (
            g_normalize(xs.column(0).into_owned(), gm),
            g_normalize(ys.column(0).into_owned(), gm),
        )
    } else {
        let v = linalg::g_orthonormalize(&linalg::orth_complement_within(&ch.a, &ch.a_j, gm), gm);
        if v.ncols() != 2 {
            return Err(Error::Precondition("a ∩ a_J^⊥ is not 2-dimensional".into()));
        }
        let vs = [v.column(0).into_owned(), v.column(1).into_owned()];
        let mut basis = RMat::zeros(alg.dim(), 2 + ch.a_j.ncols());
        basis.view_mut((0, 0), (alg.dim(), 2)).copy_from(&v);
        basis
            .view_mut((0, 2), (alg.dim(), ch.a_j.ncols()))
            .copy_from(&ch.a_j);
        let tau: Vec<f64> = vs
            .iter()
            .map(|vk| {
                let jv = jm * vk;
                (0..2)
                    .map(|l| linalg::lstsq(&basis, &alg.bracket(&jv, &vs[l]))[l])
                    .sum()
            })
            .collect();
        let x = if tau[0].hypot(tau[1]) > ch.tol {
            &vs[0] * tau[1] - &vs[1] * tau[0]
        } else {
            let hint = ideal.basis().column(0).into_owned();
            let h: Vec<f64> = vs.iter().map(|vk| linalg::g_dot(gm, &hint, vk)).collect();
            if h[0].hypot(h[1]) > 1e-8 * hint.norm() {
                &vs[0] * h[0] + &vs[1] * h[1]
            } else {
                vs[0].clone()
            }
        };
        let x = g_normalize(x, gm);
        let pick = if linalg::g_dot(gm, &vs[0], &x).abs() < linalg::g_dot(gm, &vs[1], &x).abs() {
            &vs[0]
        } else {
            &vs[1]
        };
        let y = pick - &x * linalg::g_dot(gm, pick, &x);
        (x, g_normalize(y, gm))
    };
    let x = first_significant_positive(x);
    let jx = jm * &x;
    let mut y = y;
    let mut delta = linalg::g_dot(gm, &jx, &y);
    if delta.abs() > 1e-12 {
        if delta < 0.0 {
            y = -y;
            delta = -delta;
        }
    } else {
        y = first_significant_positive(y);
        delta = linalg::g_dot(gm, &jx, &y);
    }
    if delta.abs() >= 1.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "|delta| = {delta} is not below 1"
        )));
    }
    let dl = (1.0 - delta * delta).sqrt();
    let jy = jm * &y;

    let hol = |v: &RVec, jv: &RVec| -> CVec {
        CVec::from_fn(v.len(), |r, _| Complex64::new(v[r], -jv[r]) / SQRT_2)
    };
    let e1 = hol(&x, &jx);
    let yv = hol(&y, &jy);
    let e2 = (yv - &e1 * (I * delta)) / cr(dl);
    let mut seeds = vec![e1, e2];
    for k in 0..ch.a_j.ncols() {
        seeds.push(j.holomorphic_part(&ch.a_j.column(k).into_owned()));
    }
    let n = alg.dim() / 2;
    let e = unitarize(&seeds, gm, n)?;
    let frame = UnitaryFrame::from_vectors(alg, j, e)?;
    let unit = frame.unitarity_residual(gm);
    if unit > 1e-8 {
        return Err(Error::BadFrame(format!(
            "admissible frame not unitary: {unit:.3e}"
        )));
    }
    let mut scalars = extract_scalars(alg, jm, &x, &y, &ch.a_j)?;
    scalars.delta = delta;
    let blocks = blocks_from_frame(&frame, scalars);
    Ok(AdmissibleFrame {
        frame,
        x,
        y,
        scalars,
        blocks,
        non_abelian: ch.non_abelian,
    })
}

/// Reads `a, b, c, c', d', σ` from the brackets of `x, y, Jx, Jy` modulo `a_J`.
fn extract_scalars(
    alg: &RealLieAlgebra,
    jm: &RMat,
    x: &RVec,
    y: &RVec,
    a_j: &RMat,
) -> Result<Scalars> {
    let dim = alg.dim();
    let jx = jm * x;
    let jy = jm * y;
    let mut p = RMat::zeros(dim, dim);
    p.set_column(0, x);
    p.set_column(1, y);
    p.view_mut((0, 2), (dim, a_j.ncols())).copy_from(a_j);
    p.set_column(dim - 2, &jx);
    p.set_column(dim - 1, &jy);
    let lu = p.lu();
    let coords = |v: RVec| -> Result<RVec> {
        lu.solve(&v)
            .ok_or_else(|| Error::Precondition("x, y, a_J, Jx, Jy do not span g".into()))
    };
    let jx_x = coords(alg.bracket(&jx, x))?;
    let jx_y = coords(alg.bracket(&jx, y))?;
    let jy_y = coords(alg.bracket(&jy, y))?;
    let jx_jy = coords(alg.bracket(&jx, &jy))?;
    Ok(Scalars {
        a: jx_x[0],
        b: jx_x[1],
        c: jx_y[0],
        cp: jy_y[0],
        dp: jy_y[1],
        sigma: jx_jy[dim - 2],
        delta: 0.0,
    })
}

/// `E_α`, `V_α`, `Y_α` read from the `D` tensor of an admissible frame.
pub fn blocks_from_frame(frame: &UnitaryFrame, scalars: Scalars) -> Codim2Blocks {
    let n = frame.n();
    let m = n - 2;
    let d = frame.d();
    let mk = |alpha: usize| {
        let e = CMat::from_fn(2, 2, |i, j| d.get(j, i, alpha));
        let v = CMat::from_fn(m, 2, |i, j| d.get(j, i + 2, alpha));
        let y = CMat::from_fn(m, m, |i, j| d.get(j + 2, i + 2, alpha));
        (e, v, y)
    };
    let (e1, v1, y1) = mk(0);
    let (e2, v2, y2) = mk(1);
    Codim2Blocks::new(e1, e2, v1, v2, y1, y2, scalars)
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceDims {
    pub a_j: usize,
    pub b: Option<usize>,
    pub a: usize,
    pub a_prime: Option<usize>,
    pub derived: usize,
    pub g: usize,
}

#[derive(Debug, Clone)]
pub struct CaseInfo {
    pub tag: CaseTag,
    pub r0: Option<usize>,
    pub a_j: RMat,
    pub a_prime: Option<RMat>,
    pub b: Option<RMat>,
    pub dims: SubspaceDims,
    /// `‖[Jb, b]‖` outside `b` and `‖[Jb, a]‖` outside `a_J` (non-abelian quotient only).
    pub containment: Option<(f64, f64)>,
    pub admissible: AdmissibleFrame,
}

/// Case tag from subspace containments, with `r_0` for an abelian quotient.
pub fn classify_case(
    alg: &RealLieAlgebra,
    ideal: &Subspace,
    j: &ComplexStructure,
    g: &HermitianMetric,
) -> Result<CaseInfo> {
    let ch = chain(alg, ideal, j)?;
    let admissible = admissible_frame(alg, ideal, j, g)?;
    let jm = j.matrix();
    let (tag, r0, containment) = if ch.non_abelian {
        let b = ch.b.as_ref().expect("non-abelian chain has b");
        let jb = jm * b;
        let bb = bracket_excess(alg, &jb, b, b);
        let ba = bracket_excess(alg, &jb, &ch.a, &ch.a_j);
        let tag = if bb > ch.tol {
            CaseTag::NaGeneric
        } else if ba > ch.tol {
            CaseTag::NaHalfGeneric
        } else {
            CaseTag::NaDegenerate
        };
        (tag, None, Some((bb, ba)))
    } else {
        let r0 = linalg::sum(&ch.a_j, &ch.derived).ncols() - ch.a_j.ncols();
        let tag = match r0 {
            0 => CaseTag::AbR0,
            1 => {
                let s = admissible.scalars;
                if s.cp.abs() <= REL_TOL.sqrt() * s.scale() {
                    CaseTag::AbR1Sub2
                } else {
                    CaseTag::AbR1Sub3
                }
            }
            _ => CaseTag::AbR2,
        };
        (tag, Some(r0), None)
    };
    let dims = SubspaceDims {
        a_j: ch.a_j.ncols(),
        b: ch.b.as_ref().map(|m| m.ncols()),
        a: ch.a.ncols(),
        a_prime: ch.a_prime.as_ref().map(|m| m.ncols()),
        derived: ch.derived.ncols(),
        g: alg.dim(),
    };
    Ok(CaseInfo {
        tag,
        r0,
        a_j: ch.a_j,
        a_prime: ch.a_prime,
        b: ch.b,
        dims,
        containment,
        admissible,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Report {
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
}

/// Named residuals of the block structure, the `C`-from-`D` relations, the closed
/// forms of `E_α` and the Jacobi and trace relations on the blocks.
pub fn verify_lemma2(
    frame: &UnitaryFrame,
    blocks: &Codim2Blocks,
    t: Complex64,
    tol: f64,
) -> Lemma2Report {
    let n = frame.n();
    let (c, d) = (frame.c(), frame.d());
    let mut vanishing: f64 = 0.0;
    let mut c1i: f64 = 0.0;
    let mut c2i: f64 = 0.0;
    let mut c12: f64 = 0.0;
    for m in 0..n {
        for i in 0..n {
            for k in 2..n {
                vanishing = vanishing.max(d.get(m, i, k).norm());
                if i >= 2 {
                    vanishing = vanishing.max(c.get(m, i, k).norm());
                }
            }
        }
        for i in 2..n {
            if m < 2 {
                vanishing = vanishing
                    .max(c.get(m, 0, i).norm())
                    .max(c.get(m, 1, i).norm());
            }
            for al in 0..2 {
                for be in 0..2 {
                    vanishing = vanishing.max(d.get(i, al, be).norm());
                }
            }
            c1i = c1i.max((c.get(m, 0, i) - d.get(i, m, 0).conj()).norm());
            c2i = c2i.max(
                (c.get(m, 1, i) - d.get(i, m, 1).conj() + t * 2.0 * d.get(i, m, 0).conj()).norm(),
            );
        }
        let rhs = d.get(1, m, 0).conj() - d.get(0, m, 1).conj() + t * 2.0 * d.get(0, m, 0).conj();
        c12 = c12.max((c.get(m, 0, 1) - rhs).norm());
    }
    let closed_c12 = (c.get(0, 0, 1) + blocks.q)
        .norm()
        .max(c.get(1, 0, 1).norm());
    let fb = blocks_from_frame(frame, blocks.scalars);
    let (ce1, ce2) = e_blocks(&blocks.scalars);
    let e_closed = linalg::max_abs_c(&(&fb.e1 - &ce1)).max(linalg::max_abs_c(&(&fb.e2 - &ce2)));
    let mut block_match: f64 = 0.0;
    for al in 0..2 {
        block_match = block_match
            .max(linalg::max_abs_c(&(fb.e(al) - blocks.e(al))))
            .max(linalg::max_abs_c(&(fb.v(al) - blocks.v(al))))
            .max(linalg::max_abs_c(&(fb.y(al) - blocks.y(al))));
    }
    let mut residuals = BTreeMap::new();
    residuals.insert("vanishing".to_string(), vanishing);
    residuals.insert("C_1i".to_string(), c1i);
    residuals.insert("C_2i".to_string(), c2i);
    residuals.insert("C_12".to_string(), c12);
    residuals.insert("C12_closed".to_string(), closed_c12);
    residuals.insert("E_closed".to_string(), e_closed);
    residuals.insert("blocks".to_string(), block_match);
    for (name, r) in block_relations(blocks) {
        residuals.insert(name.to_string(), r);
    }
    let pass = residuals.values().all(|&r| r <= tol);
    Lemma2Report { residuals, pass }
}
