//! Complex structures, compatible metrics and unitary frames.
//!
//! A frame is stored as the `2n × n` matrix of its vectors in the real basis.
//! `C` and `D` are read off from `B^{-1}` with `B = [e, ē]`:
//! `C^j_{ik} = φ_j([e_i, e_k])` and `D^j_{ik} = φ̄_i([ē_j, e_k])`.

pub mod forms;

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie_core::RealLieAlgebra;
use crate::linalg::{self, cr, CMat, CVec, RMat, RVec, I};

pub use forms::{ce_differential, Differential, FormTerm, InvariantForm};

/// Default tolerance for residual flags in this module.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    j: RMat,
}

impl ComplexStructure {
    pub fn new(j: RMat) -> Result<Self> {
        if !j.is_square() || j.nrows() % 2 != 0 || j.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "J must be square of even size, got {}x{}",
                j.nrows(),
                j.ncols()
            )));
        }
        let d = j.nrows();
        let res = linalg::max_abs(&(&j * &j + RMat::identity(d, d)));
        let scale = linalg::max_abs(&j).max(1.0);
        if res > 1e-12 * scale * scale {
            return Err(Error::NotAlmostComplex(res));
        }
        Ok(Self { j })
    }

    /// `J b_{2k} = b_{2k+1}`, `J b_{2k+1} = −b_{2k}`.
    pub fn standard(n: usize) -> Self {
        let mut j = RMat::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(2 * k + 1, 2 * k)] = 1.0;
            j[(2 * k, 2 * k + 1)] = -1.0;
        }
        Self { j }
    }

    pub fn matrix(&self) -> &RMat {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn apply(&self, v: &RVec) -> RVec {
        &self.j * v
    }

    /// `x − √−1 Jx`.
    pub fn holomorphic_part(&self, x: &RVec) -> CVec {
        let jx = &self.j * x;
        CVec::from_fn(x.len(), |r, _| Complex64::new(x[r], -jx[r]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMetric {
    g: RMat,
}

impl HermitianMetric {
    pub fn new(g: RMat, j: &ComplexStructure) -> Result<Self> {
        if g.shape() != j.matrix().shape() {
            return Err(Error::Dimension(format!(
                "metric is {}x{}, J is {}x{}",
                g.nrows(),
                g.ncols(),
                j.dim(),
                j.dim()
            )));
        }
        let scale = linalg::max_abs(&g).max(1.0);
        if linalg::max_abs(&(&g - g.transpose())) > 1e-12 * scale {
            return Err(Error::NotPositiveDefinite);
        }
        if Cholesky::new(g.clone()).is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let jm = j.matrix();
        let res = linalg::max_abs(&(jm.transpose() * &g * jm - &g));
        let jscale = linalg::max_abs(jm).max(1.0);
        if res > 1e-10 * scale * jscale * jscale {
            return Err(Error::NotCompatible(res));
        }
        Ok(Self { g })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            g: RMat::identity(dim, dim),
        }
    }

    pub fn matrix(&self) -> &RMat {
        &self.g
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegrabilityReport {
    pub flag: bool,
    pub residual: f64,
}

/// Nijenhuis-type residual `max ‖[x,y] − [Jx,Jy] + J[Jx,y] + J[x,Jy]‖` over basis pairs.
pub fn check_integrability(
    alg: &RealLieAlgebra,
    j: &ComplexStructure,
    tol: f64,
) -> Result<IntegrabilityReport> {
    if j.dim() != alg.dim() {
        return Err(Error::Dimension("J and algebra dimensions differ".into()));
    }
    let d = alg.dim();
    let jm = j.matrix();
    let mut residual: f64 = 0.0;
    for a in 0..d {
        let x = RVec::from_fn(d, |r, _| if r == a { 1.0 } else { 0.0 });
        let jx = jm * &x;
        for b in (a + 1)..d {
            let y = RVec::from_fn(d, |r, _| if r == b { 1.0 } else { 0.0 });
            let jy = jm * &y;
            let n = alg.bracket(&x, &y) - alg.bracket(&jx, &jy)
                + jm * alg.bracket(&jx, &y)
                + jm * alg.bracket(&x, &jy);
            residual = residual.max(n.norm());
        }
    }
    Ok(IntegrabilityReport {
        flag: residual <= tol,
        residual,
    })
}

/// Complex 3-index tensor `T^up_{i k}` over `n` frame indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CTensor {
    n: usize,
    data: Vec<Complex64>,
}

impl CTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![cr(0.0); n * n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, up: usize, i: usize, k: usize) -> Complex64 {
        self.data[(up * self.n + i) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, up: usize, i: usize, k: usize, v: Complex64) {
        let n = self.n;
        self.data[(up * n + i) * n + k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Nested `[up][i][k]` arrays of `[re, im]` pairs.
    pub fn to_nested(&self) -> Vec<Vec<Vec<[f64; 2]>>> {
        let n = self.n;
        (0..n)
            .map(|u| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|k| {
                                let z = self.get(u, i, k);
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// A frame of `g^{1,0}`, declared unitary, with its structure constants.
#[derive(Debug, Clone)]
pub struct UnitaryFrame {
    alg: RealLieAlgebra,
    j: ComplexStructure,
    e: CMat,
    coframe: CMat,
    c: CTensor,
    d: CTensor,
}

impl UnitaryFrame {
    /// Takes the columns of `e` as a unitary frame; the metric is the one this declares.
    pub fn from_vectors(alg: &RealLieAlgebra, j: &ComplexStructure, e: CMat) -> Result<Self> {
        let dim = alg.dim();
        if j.dim() != dim || e.nrows() != dim || 2 * e.ncols() != dim {
            return Err(Error::Dimension(format!(
                "frame of shape {}x{} in dimension {dim}",
                e.nrows(),
                e.ncols()
            )));
        }
        let n = e.ncols();
        let jc = linalg::to_complex(j.matrix());
        let scale = linalg::max_abs_c(&e).max(1e-300);
        let typ = linalg::max_abs_c(&(&jc * &e - &e * I));
        if typ > 1e-9 * scale * linalg::max_abs(j.matrix()).max(1.0) {
            return Err(Error::BadFrame(format!(
                "vectors are not of type (1,0): {typ:.3e}"
            )));
        }
        let mut b = CMat::zeros(dim, dim);
        b.view_mut((0, 0), (dim, n)).copy_from(&e);
        b.view_mut((0, n), (dim, n)).copy_from(&e.map(|z| z.conj()));
        let binv = b
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::BadFrame("vectors are linearly dependent".into()))?;
        let check = linalg::max_abs_c(&(&binv * &b - CMat::identity(dim, dim)));
        if !check.is_finite() || check > 1e-8 {
            return Err(Error::BadFrame(format!(
                "ill-conditioned frame: {check:.3e}"
            )));
        }

        let cols: Vec<CVec> = (0..n).map(|i| e.column(i).into_owned()).collect();
        let conj: Vec<CVec> = cols.iter().map(|v| v.map(|z| z.conj())).collect();
        let mut c = CTensor::zeros(n);
        for i in 0..n {
            for k in (i + 1)..n {
                let z = &binv * alg.bracket_c(&cols[i], &cols[k]);
                for up in 0..n {
                    c.set(up, i, k, z[up]);
                    c.set(up, k, i, -z[up]);
                }
            }
        }
        let mut d = CTensor::zeros(n);
        for jj in 0..n {
            for k in 0..n {
                let z = &binv * alg.bracket_c(&conj[jj], &cols[k]);
                for i in 0..n {
                    d.set(jj, i, k, z[n + i]);
                }
            }
        }
        Ok(Self {
            alg: alg.clone(),
            j: j.clone(),
            e,
            coframe: binv.rows(0, n).into_owned(),
            c,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.e.ncols()
    }

    pub fn algebra(&self) -> &RealLieAlgebra {
        &self.alg
    }

    pub fn complex_structure(&self) -> &ComplexStructure {
        &self.j
    }

    pub fn vectors(&self) -> &CMat {
        &self.e
    }

    /// Rows are the coframe `φ_i` as functionals on the real basis.
    pub fn coframe(&self) -> &CMat {
        &self.coframe
    }

    pub fn c(&self) -> &CTensor {
        &self.c
    }

    pub fn d(&self) -> &CTensor {
        &self.d
    }

    /// The real inner product for which this frame is unitary: `g = 2 Re(Φᵀ Φ̄)`.
    pub fn metric(&self) -> RMat {
        let phi = &self.coframe;
        let m = phi.transpose() * phi.map(|z| z.conj());
        m.map(|z| 2.0 * z.re)
    }

    /// New frame `ẽ_i = Σ_k W_{ik} e_k`, declared unitary.
    pub fn transform(&self, w: &CMat) -> Result<Self> {
        if w.nrows() != self.n() || w.ncols() != self.n() {
            return Err(Error::Dimension("frame change must be n x n".into()));
        }
        Self::from_vectors(&self.alg, &self.j, &self.e * w.transpose())
    }

    /// `max |h(e_i, e_j) − δ_ij|` for the metric `g`.
    pub fn unitarity_residual(&self, g: &RMat) -> f64 {
        let gc = linalg::to_complex(g);
        let gram = self.e.transpose() * gc * self.e.map(|z| z.conj());
        linalg::max_abs_c(&(gram - CMat::identity(self.n(), self.n())))
    }
}

/// Unitary frame of `(alg, J, g)` by Gram–Schmidt on `b_k − √−1 J b_k`.
pub fn build_unitary_frame(
    alg: &RealLieAlgebra,
    j: &ComplexStructure,
    g: &HermitianMetric,
) -> Result<UnitaryFrame> {
    let dim = alg.dim();
    if j.dim() != dim || g.matrix().nrows() != dim {
        return Err(Error::Dimension(
            "algebra, J and g dimensions differ".into(),
        ));
    }
    let metric = HermitianMetric::new(g.matrix().clone(), j)?;
    let integ = check_integrability(alg, j, 0.0)?;
    let jscale = linalg::max_abs(j.matrix()).max(1.0);
    if integ.residual > DEFAULT_TOL * alg.scale() * jscale * jscale {
        return Err(Error::NotIntegrable(integ.residual));
    }
    let seeds: Vec<CVec> = (0..dim)
        .map(|k| j.holomorphic_part(&RVec::from_fn(dim, |r, _| if r == k { 1.0 } else { 0.0 })))
        .collect();
    let e = unitarize(&seeds, metric.matrix(), dim / 2)?;
    UnitaryFrame::from_vectors(alg, j, e)
}

/// Modified Gram–Schmidt in `h(u, v) = uᵀ g v̄`, keeping the first `n` independent vectors.
pub fn unitarize(seeds: &[CVec], g: &RMat, n: usize) -> Result<CMat> {
    let gc = linalg::to_complex(g);
    let dim = g.nrows();
    let mut out: Vec<CVec> = Vec::with_capacity(n);
    for s in seeds {
        if out.len() == n {
            break;
        }
        let s_norm = linalg::h_dot(&gc, s, s).re.max(0.0).sqrt();
        if s_norm == 0.0 {
            continue;
        }
        let mut v = s.clone();
        for _ in 0..2 {
            for q in &out {
                let p = linalg::h_dot(&gc, &v, q);
                v -= q * p;
            }
        }
        let nrm = linalg::h_dot(&gc, &v, &v).re.max(0.0).sqrt();
        if nrm > 1e-8 * s_norm {
            out.push(v / cr(nrm));
        }
    }
    if out.len() != n {
        return Err(Error::BadFrame(format!(
            "found {} of {n} frame vectors",
            out.len()
        )));
    }
    Ok(CMat::from_fn(dim, n, |r, k| out[k][r]))
}

/// `T^j_{ik} = −C^j_{ik} − D^j_{ik} + D^j_{ki}`.
pub fn torsion_tensor(frame: &UnitaryFrame) -> CTensor {
    let n = frame.n();
    let (c, d) = (frame.c(), frame.d());
    let mut t = CTensor::zeros(n);
    for j in 0..n {
        for i in 0..n {
            for k in 0..n {
                t.set(j, i, k, -c.get(j, i, k) - d.get(j, i, k) + d.get(j, k, i));
            }
        }
    }
    t
}

/// Max-norm residuals of the three families of C/D Jacobi identities.
pub fn verify_jacobi_cd(frame: &UnitaryFrame) -> [f64; 3] {
    jacobi_cd_residuals(frame.c(), frame.d())
}

pub fn jacobi_cd_residuals(c: &CTensor, d: &CTensor) -> [f64; 3] {
    let n = c.n();
    let mut res = [0.0f64; 3];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut f1 = cr(0.0);
                    let mut f2 = cr(0.0);
                    let mut f3 = cr(0.0);
                    for r in 0..n {
                        f1 += c.get(r, i, j) * c.get(l, r, k)
                            + c.get(r, j, k) * c.get(l, r, i)
                            + c.get(r, k, i) * c.get(l, r, j);
                        f2 += c.get(r, i, k) * d.get(l, j, r) + d.get(r, j, i) * d.get(l, r, k)
                            - d.get(r, j, k) * d.get(l, r, i);
                        f3 += c.get(r, i, k) * d.get(r, j, l).conj()
                            - c.get(j, r, k) * d.get(i, r, l).conj()
                            + c.get(j, r, i) * d.get(k, r, l).conj()
                            - d.get(l, r, i) * d.get(k, j, r).conj()
                            + d.get(l, r, k) * d.get(i, j, r).conj();
                    }
                    res[0] = res[0].max(f1.norm());
                    res[1] = res[1].max(f2.norm());
                    res[2] = res[2].max(f3.norm());
                }
            }
        }
    }
    res
}

/// `max_i |Σ_r (C^r_{ri} + D^r_{ri})|`.
pub fn unimodularity_residual_cd(frame: &UnitaryFrame) -> f64 {
    let n = frame.n();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|r| frame.c().get(r, r, i) + frame.d().get(r, r, i))
                .sum::<Complex64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_dim(j: RMat) -> (RealLieAlgebra, ComplexStructure) {
        let alg = RealLieAlgebra::abelian(4).with_bracket(0, 1, &[(2, 1.0)]);
        (alg, ComplexStructure { j })
    }

    fn pairing(pairs: &[(usize, usize)]) -> RMat {
        let mut j = RMat::zeros(4, 4);
        for &(a, b) in pairs {
            j[(b, a)] = 1.0;
            j[(a, b)] = -1.0;
        }
        j
    }

    #[test]
    fn almost_complex_check() {
        assert!(matches!(
            ComplexStructure::new(RMat::identity(2, 2)),
            Err(Error::NotAlmostComplex(_))
        ));
        assert!(ComplexStructure::new(ComplexStructure::standard(3).j).is_ok());
    }

    #[test]
    fn integrability_hand_cases() {
        // J pairs (e1,e2), (e3,e4): N(e1,e2) = [e1,e2] - [e2,-e1] + ... = 0
        let (alg, j) = four_dim(pairing(&[(0, 1), (2, 3)]));
        let r = check_integrability(&alg, &j, 1e-12).unwrap();
        assert_eq!(r.residual, 0.0);
        // J pairs (e1,e3), (e2,e4): N(e1,e2) = [e1,e2] = e3, all other terms vanish
        let (alg, j) = four_dim(pairing(&[(0, 2), (1, 3)]));
        let r = check_integrability(&alg, &j, 1e-12).unwrap();
        assert!((r.residual - 1.0).abs() < 1e-15);
        assert!(!r.flag);
    }

    #[test]
    fn two_dim_frame() {
        // [x, Jx] = x, J x = Jx, g standard
        let alg = RealLieAlgebra::abelian(2).with_bracket(0, 1, &[(0, 1.0)]);
        let j = ComplexStructure::standard(1);
        let f = build_unitary_frame(&alg, &j, &HermitianMetric::identity(2)).unwrap();
        assert_eq!(f.c().get(0, 0, 0), cr(0.0));
        // e = (x − iJx)/√2, [e, ē] = i[x, Jx] = i x = (i/√2)(e + ē)
        // so [ē, e] = −(i/√2)(e + ē), and D¹₁₁ = φ̄([ē, e]) = −i/√2
        let d = f.d().get(0, 0, 0);
        assert!((d - Complex64::new(0.0, -1.0 / 2f64.sqrt())).norm() < 1e-14);
        assert!(f.unitarity_residual(&RMat::identity(2, 2)) < 1e-14);
    }

    #[test]
    fn metric_of_frame_round_trips() {
        let alg = RealLieAlgebra::abelian(4);
        let j = ComplexStructure::standard(2);
        let mut g = RMat::identity(4, 4);
        g[(0, 0)] = 2.0;
        g[(1, 1)] = 2.0;
        g[(0, 2)] = 0.3;
        g[(2, 0)] = 0.3;
        g[(1, 3)] = 0.3;
        g[(3, 1)] = 0.3;
        let f =
            build_unitary_frame(&alg, &j, &HermitianMetric::new(g.clone(), &j).unwrap()).unwrap();
        assert!(linalg::max_abs(&(f.metric() - &g)) < 1e-13);
    }

    #[test]
    fn bad_frames_rejected() {
        let alg = RealLieAlgebra::abelian(2);
        let j = ComplexStructure::standard(1);
        let real = CMat::from_column_slice(2, 1, &[cr(1.0), cr(0.0)]);
        assert!(matches!(
            UnitaryFrame::from_vectors(&alg, &j, real),
            Err(Error::BadFrame(_))
        ));
    }
}
