//! Constructors: closed-form `E` blocks, `C`/`D` synthesis and the real algebra.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use super::{shape_check, CaseTag, Codim2Blocks, Codim2Instance, Codim2Params, Scalars};
use crate::complex_frames::{CTensor, ComplexStructure, HermitianMetric, UnitaryFrame};
use crate::error::{Error, Result};
use crate::lie_core::{jacobi_residual, verify_abelian_ideal, RealLieAlgebra, Subspace};
use crate::linalg::{self, c, cr, CMat, RMat, I};

/// `E_1`, `E_2` from the real constants; `(E_α)[i][j] = D^{j}_{iα}`.
pub fn e_blocks(s: &Scalars) -> (CMat, CMat) {
    let Scalars {
        a,
        b,
        c: cc,
        cp,
        dp,
        sigma,
        delta,
    } = *s;
    let dl = s.delta_p();
    let d2 = delta * delta;
    let d111 = c(b * delta, a) / SQRT_2;
    let d121 = I * (b * dl / SQRT_2);
    let d211 = c(-2.0 * a * delta, cc + b * d2) / (SQRT_2 * dl);
    let d221 = -c(b * delta, a) / SQRT_2;
    let d112 = I * ((cc - sigma - b * d2) / (SQRT_2 * dl));
    let d122 = c(b * delta, -a) / SQRT_2;
    let d212 = c(delta * (dp + b * d2 + sigma), cp + a * d2) / (SQRT_2 * dl * dl);
    let d222 = I * ((dp + b * d2) / (SQRT_2 * dl));
    let e1 = CMat::from_row_slice(2, 2, &[d111, d211, d121, d221]);
    let e2 = CMat::from_row_slice(2, 2, &[d112, d212, d122, d222]);
    (e1, e2)
}

/// Entry `[i][j]` of `D_α = [[E_α, 0], [V_α, Y_α]]`.
fn d_block(blocks: &Codim2Blocks, alpha: usize, i: usize, j: usize) -> Complex64 {
    match (i < 2, j < 2) {
        (true, true) => blocks.e(alpha)[(i, j)],
        (true, false) => cr(0.0),
        (false, true) => blocks.v(alpha)[(i - 2, j)],
        (false, false) => blocks.y(alpha)[(i - 2, j - 2)],
    }
}

/// `C` and `D` of an admissible frame with the given blocks.
pub fn cd_from_blocks(blocks: &Codim2Blocks) -> (CTensor, CTensor) {
    let n = blocks.m() + 2;
    let t = blocks.t();
    let mut d = CTensor::zeros(n);
    for alpha in 0..2 {
        for i in 0..n {
            for j in 0..n {
                d.set(j, i, alpha, d_block(blocks, alpha, i, j));
            }
        }
    }
    let mut cten = CTensor::zeros(n);
    let mut put = |up: usize, i: usize, k: usize, v: Complex64| {
        cten.set(up, i, k, v);
        cten.set(up, k, i, -v);
    };
    for m in 0..n {
        for i in 2..n {
            put(m, 0, i, d.get(i, m, 0).conj());
            put(
                m,
                1,
                i,
                d.get(i, m, 1).conj() - t * 2.0 * d.get(i, m, 0).conj(),
            );
        }
        put(
            m,
            0,
            1,
            d.get(1, m, 0).conj() - d.get(0, m, 1).conj() + t * 2.0 * d.get(0, m, 0).conj(),
        );
    }
    (cten, d)
}

/// Columns `e_k = (b_{2k} − √−1 b_{2k+1})/√2` of the standard frame.
pub fn standard_frame(n: usize) -> CMat {
    let mut e = CMat::zeros(2 * n, n);
    for k in 0..n {
        e[(2 * k, k)] = cr(1.0 / SQRT_2);
        e[(2 * k + 1, k)] = c(0.0, -1.0 / SQRT_2);
    }
    e
}

/// Real algebra whose standard frame has structure constants `C`, `D`.
pub fn structure_from_cd(cten: &CTensor, d: &CTensor) -> RealLieAlgebra {
    let n = cten.n();
    let dim = 2 * n;
    // bracket on the basis {e_0..e_{n-1}, ē_0..ē_{n-1}}, coordinates in the same basis
    let mut br = vec![vec![vec![cr(0.0); dim]; dim]; dim];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                br[i][k][j] = cten.get(j, i, k);
                br[n + i][n + k][n + j] = cten.get(j, i, k).conj();
            }
            // [e_i, ē_k] = Σ_r (conj(D^i_{rk}) e_r − D^k_{ri} ē_r)
            for r in 0..n {
                let to_e = d.get(i, r, k).conj();
                let to_eb = -d.get(k, r, i);
                br[i][n + k][r] = to_e;
                br[i][n + k][n + r] = to_eb;
                br[n + k][i][r] = -to_e;
                br[n + k][i][n + r] = -to_eb;
            }
        }
    }
    let e = standard_frame(n);
    let mut b = CMat::zeros(dim, dim);
    b.view_mut((0, 0), (dim, n)).copy_from(&e);
    b.view_mut((0, n), (dim, n)).copy_from(&e.map(|z| z.conj()));
    let binv = b.clone().try_inverse().expect("standard frame is a basis");
    let mut alg = RealLieAlgebra::abelian(dim);
    for p in 0..dim {
        for q in (p + 1)..dim {
            let mut w = vec![cr(0.0); dim];
            for u in 0..dim {
                let cu = binv[(u, p)];
                if cu == cr(0.0) {
                    continue;
                }
                for v in 0..dim {
                    let cv = binv[(v, q)];
                    if cv == cr(0.0) {
                        continue;
                    }
                    for (s, z) in br[u][v].iter().enumerate() {
                        w[s] += cu * cv * z;
                    }
                }
            }
            for k in 0..dim {
                let mut val = cr(0.0);
                for (s, z) in w.iter().enumerate() {
                    val += b[(k, s)] * z;
                }
                alg.set(k, p, q, val.re);
                alg.set(k, q, p, -val.re);
            }
        }
    }
    alg
}

fn relation(name: &str, residual: f64, tol: f64) -> Result<()> {
    if residual <= tol {
        Ok(())
    } else {
        Err(Error::ParameterRelation {
            relation: name.to_string(),
            residual,
        })
    }
}

fn nonzero(name: &str, value: f64, tol: f64) -> Result<()> {
    if value.abs() > tol {
        Ok(())
    } else {
        Err(Error::ParameterRelation {
            relation: name.to_string(),
            residual: value.abs(),
        })
    }
}

/// Checks the scalar relations required by the case tag.
pub(crate) fn validate_scalars(tag: CaseTag, s: &Scalars) -> Result<()> {
    let Scalars {
        a,
        b,
        c: cc,
        cp,
        dp,
        sigma,
        ..
    } = *s;
    let tol = 1e-9 * s.scale().powi(2);
    let rel = |name: &str, r: f64| relation(name, r.abs(), tol);
    if tag == CaseTag::AbR2 {
        return Err(Error::UnsupportedTag);
    }
    if tag.is_non_abelian() {
        nonzero("sigma != 0", sigma, 1e-12)?;
        rel("a^2 + bc = 0", a * a + b * cc)?;
    } else {
        rel("sigma = 0", sigma)?;
    }
    rel("bc' = -a(c + sigma)", b * cp + a * (cc + sigma))?;
    rel(
        "bd' = 2a^2 + bc - 2b sigma",
        b * dp - (2.0 * a * a + b * cc - 2.0 * b * sigma),
    )?;
    rel("2ac' + cd' = c^2", 2.0 * a * cp + cc * dp - cc * cc)?;
    match tag {
        CaseTag::NaGeneric => nonzero("b != 0", b, 1e-12),
        CaseTag::NaHalfGeneric => {
            rel("b = 0", b)?;
            nonzero("c != 0", cc, 1e-12)
        }
        CaseTag::NaDegenerate => {
            rel("b = 0", b)?;
            rel("c = 0", cc)
        }
        CaseTag::AbR0 => rel(
            "a = b = c = c' = d' = 0",
            [a, b, cc, cp, dp]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())),
        ),
        CaseTag::AbR1Sub2 => {
            rel("c' = 0", cp)?;
            nonzero("b != 0", b, 1e-12)
        }
        CaseTag::AbR1Sub3 => {
            nonzero("c' != 0", cp, 1e-12)?;
            rel("a = c^2/c'", a - cc * cc / cp)?;
            rel("b = -c^3/c'^2", b + cc.powi(3) / (cp * cp))
        }
        CaseTag::AbR2 => Err(Error::UnsupportedTag),
    }
}

/// Residuals of `[E_1,E_2] = qE_1`, `[Y_1,Y_2] = qY_1`, the `V` relation and the trace relation.
pub(crate) fn block_relations(blocks: &Codim2Blocks) -> [(&'static str, f64); 4] {
    let q = blocks.q;
    let t = blocks.t();
    let je = linalg::max_abs_c(&(linalg::commutator(&blocks.e1, &blocks.e2) - &blocks.e1 * q));
    let jy = linalg::max_abs_c(&(linalg::commutator(&blocks.y1, &blocks.y2) - &blocks.y1 * q));
    let jv = linalg::max_abs_c(
        &(&blocks.v1 * &blocks.e2 + &blocks.y1 * &blocks.v2
            - &blocks.v2 * &blocks.e1
            - &blocks.y2 * &blocks.v1
            - &blocks.v1 * q),
    );
    let tr1 = linalg::trace_c(&blocks.y1);
    let tr2 = linalg::trace_c(&blocks.y2);
    let tr = (tr2 - tr2.conj() + t * 2.0 * tr1.conj() - blocks.scalars.trace_rhs()).norm();
    [
        ("Jacobi1_E", je),
        ("Jacobi1_Y", jy),
        ("Jacobi2", jv),
        ("trace", tr),
    ]
}

fn build(params: &Codim2Params) -> Result<Codim2Instance> {
    shape_check(params)?;
    validate_scalars(params.case_tag, &params.scalars)?;
    let s = params.scalars;
    let (e1, e2) = e_blocks(&s);
    let blocks = Codim2Blocks::new(
        e1,
        e2,
        params.v1.clone(),
        params.v2.clone(),
        params.y1.clone(),
        params.y2.clone(),
        s,
    );
    let bscale = [&blocks.v1, &blocks.v2, &blocks.y1, &blocks.y2]
        .iter()
        .fold(s.scale() / s.delta_p().powi(2), |m, b| {
            m.max(linalg::max_abs_c(b))
        });
    for (name, r) in block_relations(&blocks) {
        relation(name, r, 1e-9 * bscale * bscale)?;
    }

    let n = params.n;
    let (cten, d) = cd_from_blocks(&blocks);
    let alg = structure_from_cd(&cten, &d);
    let j = ComplexStructure::standard(n);
    let g = HermitianMetric::identity(2 * n);
    let frame = UnitaryFrame::from_vectors(&alg, &j, standard_frame(n))?;
    let round = frame
        .c()
        .sub(&cten)
        .max_abs()
        .max(frame.d().sub(&d).max_abs());
    relation("frame round trip", round, 1e-10 * bscale)?;
    relation("Jacobi", jacobi_residual(&alg), 1e-10 * alg.scale().powi(2))?;

    let dim = 2 * n;
    let dl = s.delta_p();
    let mut basis = RMat::zeros(dim, dim - 2);
    basis[(0, 0)] = 1.0;
    basis[(1, 1)] = s.delta;
    basis[(2, 1)] = dl;
    for k in 4..dim {
        basis[(k, k - 2)] = 1.0;
    }
    let ideal = Subspace::new(basis)?;
    let rep = verify_abelian_ideal(&alg, &ideal, 1e-10 * alg.scale())?;
    if !(rep.is_ideal && rep.is_abelian) {
        return Err(Error::NotAbelianIdeal {
            ideal: rep.ideal_residual,
            abelian: rep.abelian_residual,
        });
    }
    Ok(Codim2Instance {
        params: params.clone(),
        alg,
        j,
        g,
        ideal,
        frame,
        blocks,
    })
}

/// Instance with `g/a` non-abelian.
pub fn build_case1(params: &Codim2Params) -> Result<Codim2Instance> {
    if !params.case_tag.is_non_abelian() {
        return Err(Error::Precondition(format!(
            "build_case1 needs an NA tag, got {}",
            params.case_tag
        )));
    }
    build(params)
}

/// Instance with `g/a` abelian.
pub fn build_case2(params: &Codim2Params) -> Result<Codim2Instance> {
    if params.case_tag.is_non_abelian() {
        return Err(Error::Precondition(format!(
            "build_case2 needs an AB tag, got {}",
            params.case_tag
        )));
    }
    build(params)
}
