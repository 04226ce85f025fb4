//! Block form of the Hermitian-symplectic equations in an admissible frame.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::codim2_models::Codim2Blocks;
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, CVec, I};

/// Partition of a skew `n×n` matrix `S̃ = [[0, −p, −u₁ᵀ], [p, 0, −u₂ᵀ], [u₁, u₂, S]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma3Certificate {
    #[serde(rename = "S", serialize_with = "crate::serde_util::cmat")]
    pub s: CMat,
    #[serde(serialize_with = "crate::serde_util::complex")]
    pub p: Complex64,
    #[serde(serialize_with = "crate::serde_util::cvec")]
    pub u1: CVec,
    #[serde(serialize_with = "crate::serde_util::cvec")]
    pub u2: CVec,
    /// `ξ = v²₁ = v¹₂`, present when the two columns agree.
    #[serde(serialize_with = "opt_cvec")]
    pub xi: Option<CVec>,
}

fn opt_cvec<S: serde::Serializer>(v: &Option<CVec>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => crate::serde_util::cvec(v, s),
        None => s.serialize_none(),
    }
}

impl Lemma3Certificate {
    pub fn zero(m: usize) -> Self {
        Self {
            s: CMat::zeros(m, m),
            p: cr(0.0),
            u1: CVec::zeros(m),
            u2: CVec::zeros(m),
            xi: None,
        }
    }

    /// Splits a full skew matrix; `blocks` supplies `ξ`.
    pub fn from_full(full: &CMat, blocks: &Codim2Blocks) -> Result<Self> {
        let n = full.nrows();
        if full.ncols() != n || n != blocks.m() + 2 {
            return Err(Error::Dimension(format!(
                "S is {}x{}, blocks need n = {}",
                full.nrows(),
                full.ncols(),
                blocks.m() + 2
            )));
        }
        let m = n - 2;
        let v21 = blocks.v1.column(1).into_owned();
        let v12 = blocks.v2.column(0).into_owned();
        let gap = vmax(&(&v21 - &v12));
        let xi = (gap <= 1e-9 * (1.0 + vmax(&v21))).then_some(v21);
        Ok(Self {
            s: full.view((2, 2), (m, m)).into_owned(),
            p: full[(1, 0)],
            u1: full.view((2, 0), (m, 1)).column(0).into_owned(),
            u2: full.view((2, 1), (m, 1)).column(0).into_owned(),
            xi,
        })
    }

    pub fn to_full(&self) -> CMat {
        let m = self.s.nrows();
        let mut full = CMat::zeros(m + 2, m + 2);
        full[(1, 0)] = self.p;
        full[(0, 1)] = -self.p;
        for i in 0..m {
            full[(i + 2, 0)] = self.u1[i];
            full[(0, i + 2)] = -self.u1[i];
            full[(i + 2, 1)] = self.u2[i];
            full[(1, i + 2)] = -self.u2[i];
        }
        full.view_mut((2, 2), (m, m)).copy_from(&self.s);
        full
    }

    fn u(&self, gamma: usize) -> &CVec {
        if gamma == 0 {
            &self.u1
        } else {
            &self.u2
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Lemma3Report {
    pub residuals: BTreeMap<String, f64>,
    pub pass: bool,
}

/// `C^α_{12}` from the `E` blocks.
pub(crate) fn c12(blocks: &Codim2Blocks, alpha: usize) -> Complex64 {
    let t = blocks.t();
    blocks.e1[(alpha, 1)].conj() - blocks.e2[(alpha, 0)].conj()
        + t * 2.0 * blocks.e1[(alpha, 0)].conj()
}

/// `T^α_{12} = −C^α_{12} − D^α_{12} + D^α_{21}`.
pub(crate) fn t12(blocks: &Codim2Blocks, alpha: usize) -> Complex64 {
    -c12(blocks, alpha) - blocks.e2[(0, alpha)] + blocks.e1[(1, alpha)]
}

/// Column `v^β_α` of `V_α`.
fn v(blocks: &Codim2Blocks, beta: usize, alpha: usize) -> CVec {
    blocks.v(alpha).column(beta).into_owned()
}

pub(crate) fn vmax(v: &CVec) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn conj(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

/// Max moduli of the six families (L1)–(L6).
pub fn lemma3_residuals(
    blocks: &Codim2Blocks,
    cert: &Lemma3Certificate,
    t: Complex64,
    tol: f64,
) -> Result<Lemma3Report> {
    let m = blocks.m();
    if cert.s.shape() != (m, m) || cert.u1.len() != m || cert.u2.len() != m {
        return Err(Error::Dimension(format!(
            "certificate blocks must have size {m}"
        )));
    }
    let (y1, y2) = (&blocks.y1, &blocks.y2);
    let s = &cert.s;

    let l1 = linalg::max_abs_c(&(y1 - y1.adjoint())).max(linalg::max_abs_c(
        &(y2 - y2.adjoint() + y1.adjoint() * (t * 2.0)),
    ));
    let l2 = vmax(&(v(blocks, 1, 0) - v(blocks, 0, 1) - v(blocks, 0, 0) * (t * 2.0)));

    let mut l3: f64 = 0.0;
    let mut l4: f64 = 0.0;
    let mut l5: f64 = 0.0;
    for al in 0..2 {
        let y = blocks.y(al);
        l3 = l3.max(linalg::max_abs_c(
            &(y.adjoint() * s + s * y.map(|z| z.conj())),
        ));
        for be in 0..2 {
            let mut r =
                s * conj(&v(blocks, be, al)) + y.adjoint() * cert.u(be) - v(blocks, al, be) * I;
            for g in 0..2 {
                // conj(D^β_{γα}) = conj((E_α)[γ][β])
                r += cert.u(g) * blocks.e(al)[(g, be)].conj();
            }
            l4 = l4.max(vmax(&r));
        }
        let r = -cert.p * linalg::trace_c(blocks.e(al)).conj()
            + cert.u2.dot(&conj(&v(blocks, 0, al)))
            - cert.u1.dot(&conj(&v(blocks, 1, al)))
            + I * t12(blocks, al);
        l5 = l5.max(r.norm());
    }
    let l6 = vmax(
        &(&cert.u1 * c12(blocks, 0) + &cert.u2 * c12(blocks, 1)
            - (y2.adjoint() - y1.adjoint() * (t * 2.0)) * &cert.u1
            + y1.adjoint() * &cert.u2),
    );

    let residuals: BTreeMap<String, f64> = [
        ("L1", l1),
        ("L2", l2),
        ("L3", l3),
        ("L4", l4),
        ("L5", l5),
        ("L6", l6),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let pass = residuals.values().all(|&r| r <= tol);
    Ok(Lemma3Report { residuals, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codim2_models::{generate, CaseTag};
    use crate::linalg::c;

    #[test]
    fn full_matrix_round_trip() {
        let inst = generate(CaseTag::AbR0, 4, 9).unwrap();
        let mut full = CMat::zeros(4, 4);
        for (i, j, z) in [
            (1, 0, c(0.5, 1.0)),
            (2, 0, c(-1.0, 0.2)),
            (3, 1, c(0.0, 2.0)),
            (3, 2, c(1.5, -0.5)),
        ] {
            full[(i, j)] = z;
            full[(j, i)] = -z;
        }
        let cert = Lemma3Certificate::from_full(&full, &inst.blocks).unwrap();
        assert_eq!(cert.to_full(), full);
        assert_eq!(cert.p, c(0.5, 1.0));
        assert!(Lemma3Certificate::from_full(&CMat::zeros(3, 3), &inst.blocks).is_err());
    }
}
