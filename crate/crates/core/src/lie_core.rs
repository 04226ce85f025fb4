//! Real Lie algebras given by structure constants.
//!
//! `f[k][i][j]` is the coefficient of `b_k` in `[b_i, b_j]`. Everything here is
//! basis-level: validation, unimodularity, abelian-ideal checks and the
//! derived series.

use crate::error::{Error, Result};
use crate::linalg::{self, CVec, RMat, RVec};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct RealLieAlgebra {
    dim: usize,
    f: Vec<f64>,
}

impl RealLieAlgebra {
    /// Builds the algebra from a nested `f[k][i][j]` tensor.
    pub fn from_nested(f: &[Vec<Vec<f64>>]) -> Result<Self> {
        let dim = f.len();
        if dim == 0 {
            return Err(Error::Dimension("empty structure tensor".into()));
        }
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for (k, slab) in f.iter().enumerate() {
            if slab.len() != dim {
                return Err(Error::Dimension(format!(
                    "f[{k}] has {} rows, expected {dim}",
                    slab.len()
                )));
            }
            for (i, row) in slab.iter().enumerate() {
                if row.len() != dim {
                    return Err(Error::Dimension(format!(
                        "f[{k}][{i}] has {} entries, expected {dim}",
                        row.len()
                    )));
                }
                flat.extend_from_slice(row);
            }
        }
        Ok(Self { dim, f: flat })
    }

    pub fn from_flat(dim: usize, f: Vec<f64>) -> Result<Self> {
        if dim == 0 || f.len() != dim * dim * dim {
            return Err(Error::Dimension(format!(
                "flat tensor of length {} does not match dim {dim}",
                f.len()
            )));
        }
        Ok(Self { dim, f })
    }

    pub fn abelian(dim: usize) -> Self {
        Self {
            dim,
            f: vec![0.0; dim * dim * dim],
        }
    }

    /// Sets `[b_i, b_j] = Σ coeffs` and the antisymmetric partner.
    pub fn with_bracket(mut self, i: usize, j: usize, coeffs: &[(usize, f64)]) -> Self {
        for &(k, v) in coeffs {
            self.set(k, i, j, v);
            self.set(k, j, i, -v);
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.f[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        let d = self.dim;
        self.f[(k * d + i) * d + j] = v;
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        let d = self.dim;
        (0..d)
            .map(|k| {
                (0..d)
                    .map(|i| (0..d).map(|j| self.get(k, i, j)).collect())
                    .collect()
            })
            .collect()
    }

    /// Largest structure constant in absolute value (at least 1), used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.f.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn bracket(&self, u: &RVec, v: &RVec) -> RVec {
        let d = self.dim;
        let mut out = RVec::zeros(d);
        for i in 0..d {
            if u[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = u[i] * v[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += w * self.get(k, i, j);
                }
            }
        }
        out
    }

    /// Complex-bilinear extension of the bracket to the complexification.
    pub fn bracket_c(&self, u: &CVec, v: &CVec) -> CVec {
        let d = self.dim;
        let mut out = CVec::zeros(d);
        for i in 0..d {
            if u[i] == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                let w = u[i] * v[j];
                for k in 0..d {
                    let fk = self.get(k, i, j);
                    if fk != 0.0 {
                        out[k] += w * fk;
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad_x` in the standard basis.
    pub fn ad(&self, x: &RVec) -> RMat {
        let d = self.dim;
        let mut m = RMat::zeros(d, d);
        for j in 0..d {
            for k in 0..d {
                let mut s = 0.0;
                for i in 0..d {
                    s += x[i] * self.get(k, i, j);
                }
                m[(k, j)] = s;
            }
        }
        m
    }

    /// Structure constants in the basis given by the columns of `p`.
    pub fn change_basis(&self, p: &RMat) -> Result<Self> {
        let d = self.dim;
        if p.shape() != (d, d) {
            return Err(Error::Dimension("basis change must be square".into()));
        }
        let pinv = p.clone().try_inverse().ok_or(Error::RankDeficient {
            expected: d,
            got: linalg::rank(p),
        })?;
        let cols: Vec<RVec> = (0..d).map(|i| p.column(i).into_owned()).collect();
        let mut out = Self::abelian(d);
        for i in 0..d {
            for j in (i + 1)..d {
                let w = &pinv * self.bracket(&cols[i], &cols[j]);
                for k in 0..d {
                    out.set(k, i, j, w[k]);
                    out.set(k, j, i, -w[k]);
                }
            }
        }
        Ok(out)
    }

    fn basis_vector(&self, i: usize) -> RVec {
        let mut v = RVec::zeros(self.dim);
        v[i] = 1.0;
        v
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub antisymmetry_residual: f64,
    pub jacobi_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn validate_structure_constants(alg: &RealLieAlgebra, tol: f64) -> Result<ValidationReport> {
    let d = alg.dim();
    if d < 2 {
        return Err(Error::Dimension(format!("dimension {d} < 2")));
    }
    if alg.f.len() != d * d * d {
        return Err(Error::Dimension("tensor shape".into()));
    }
    let mut anti: f64 = 0.0;
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                anti = anti.max((alg.get(k, i, j) + alg.get(k, j, i)).abs());
            }
        }
    }
    let jac = jacobi_residual(alg);
    Ok(ValidationReport {
        antisymmetry_residual: anti,
        jacobi_residual: jac,
        tol,
        pass: anti <= tol && jac <= tol,
    })
}

/// max over i<j<k, l of |Σ_m f[m][i][j] f[l][m][k] + cyclic|.
pub fn jacobi_residual(alg: &RealLieAlgebra) -> f64 {
    let d = alg.dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                for l in 0..d {
                    let mut s = 0.0;
                    for m in 0..d {
                        s += alg.get(m, i, j) * alg.get(l, m, k)
                            + alg.get(m, j, k) * alg.get(l, m, i)
                            + alg.get(m, k, i) * alg.get(l, m, j);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct UnimodularReport {
    pub flag: bool,
    pub residual: f64,
}

/// `max_x |tr ad_x|` over the standard basis.
pub fn is_unimodular(alg: &RealLieAlgebra, tol: f64) -> UnimodularReport {
    let d = alg.dim();
    let residual = (0..d)
        .map(|i| (0..d).map(|k| alg.get(k, i, k)).sum::<f64>().abs())
        .fold(0.0, f64::max);
    UnimodularReport {
        flag: residual <= tol,
        residual,
    }
}

/// A linear subspace of the algebra, given by independent basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: RMat,
}

impl Subspace {
    pub fn new(basis: RMat) -> Result<Self> {
        let r = linalg::rank(&basis);
        if r != basis.ncols() {
            return Err(Error::RankDeficient {
                expected: basis.ncols(),
                got: r,
            });
        }
        Ok(Self {
            ambient_dim: basis.nrows(),
            basis,
        })
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Result<Self> {
        let mut m = RMat::zeros(ambient_dim, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            if i >= ambient_dim {
                return Err(Error::Dimension(format!("index {i} out of range")));
            }
            m[(i, c)] = 1.0;
        }
        Self::new(m)
    }

    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let k = vectors.len();
        let d = vectors.first().map(|v| v.len()).unwrap_or(0);
        if vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Dimension("ragged basis vectors".into()));
        }
        Self::new(RMat::from_fn(d, k, |r, c| vectors[c][r]))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &RMat {
        &self.basis
    }

    pub fn to_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|c| self.basis.column(c).iter().cloned().collect())
            .collect()
    }

    /// Euclidean-orthonormal basis of the same span.
    pub fn orthonormal(&self) -> RMat {
        linalg::column_space(&self.basis)
    }

    pub fn contains(&self, v: &RVec, tol: f64) -> bool {
        linalg::distance_to_span(&self.orthonormal(), v) <= tol * v.norm().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdealReport {
    pub is_ideal: bool,
    pub is_abelian: bool,
    pub ideal_residual: f64,
    pub abelian_residual: f64,
}

pub fn verify_abelian_ideal(alg: &RealLieAlgebra, s: &Subspace, tol: f64) -> Result<IdealReport> {
    if s.ambient_dim() != alg.dim() {
        return Err(Error::Dimension(format!(
            "subspace lives in dimension {}, algebra has {}",
            s.ambient_dim(),
            alg.dim()
        )));
    }
    let q = s.orthonormal();
    if q.ncols() != s.dim() {
        return Err(Error::RankDeficient {
            expected: s.dim(),
            got: q.ncols(),
        });
    }
    let mut ideal: f64 = 0.0;
    for i in 0..alg.dim() {
        let x = alg.basis_vector(i);
        for j in 0..q.ncols() {
            let w = alg.bracket(&x, &q.column(j).into_owned());
            ideal = ideal.max(linalg::distance_to_span(&q, &w));
        }
    }
    let mut abelian: f64 = 0.0;
    for i in 0..q.ncols() {
        for j in (i + 1)..q.ncols() {
            let w = alg.bracket(&q.column(i).into_owned(), &q.column(j).into_owned());
            abelian = abelian.max(w.norm());
        }
    }
    Ok(IdealReport {
        is_ideal: ideal <= tol,
        is_abelian: abelian <= tol,
        ideal_residual: ideal,
        abelian_residual: abelian,
    })
}

/// Orthonormal basis of `[span(u), span(w)]`.
pub fn bracket_span(alg: &RealLieAlgebra, u: &RMat, w: &RMat) -> RMat {
    bracket_span_tol(alg, u, w, SPAN_RTOL * alg.scale())
}

/// Brackets below `abs_tol` in singular value count as zero.
const SPAN_RTOL: f64 = 1e-10;

fn bracket_span_tol(alg: &RealLieAlgebra, u: &RMat, w: &RMat, abs_tol: f64) -> RMat {
    let d = alg.dim();
    let mut cols: Vec<RVec> = Vec::new();
    for i in 0..u.ncols() {
        let ui = u.column(i).into_owned();
        for j in 0..w.ncols() {
            cols.push(alg.bracket(&ui, &w.column(j).into_owned()));
        }
    }
    let m = RMat::from_fn(d, cols.len(), |r, c| cols[c][r]);
    linalg::column_space_tol(&m, abs_tol)
}

/// Derived algebra `[g, g]`.
pub fn derived_algebra(alg: &RealLieAlgebra) -> RMat {
    let id = RMat::identity(alg.dim(), alg.dim());
    bracket_span(alg, &id, &id)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct DerivedSeries {
    pub dims: Vec<usize>,
    /// First index with a zero-dimensional term; `None` when the series stabilizes above zero.
    pub step: Option<usize>,
}

/// Derived series; a term counts as zero once all its brackets are below `tol` times
/// the structure-constant scale.
pub fn derived_series(alg: &RealLieAlgebra, tol: f64) -> DerivedSeries {
    let abs_tol = tol * alg.scale();
    let d = alg.dim();
    let mut current = RMat::identity(d, d);
    let mut dims = vec![d];
    for _ in 0..d {
        if current.ncols() == 0 {
            break;
        }
        let next = bracket_span_tol(alg, &current, &current, abs_tol);
        let stalled = next.ncols() == current.ncols();
        dims.push(next.ncols());
        current = next;
        if stalled {
            break;
        }
    }
    let step = dims.iter().position(|&k| k == 0);
    DerivedSeries { dims, step }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_dim() -> RealLieAlgebra {
        // [e1, e2] = e1
        RealLieAlgebra::abelian(2).with_bracket(0, 1, &[(0, 1.0)])
    }

    #[test]
    fn abelian_validates() {
        let rep = validate_structure_constants(&RealLieAlgebra::abelian(4), 1e-12).unwrap();
        assert_eq!(rep.antisymmetry_residual, 0.0);
        assert_eq!(rep.jacobi_residual, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn two_dim_validates() {
        let rep = validate_structure_constants(&two_dim(), 1e-12).unwrap();
        assert_eq!((rep.antisymmetry_residual, rep.jacobi_residual), (0.0, 0.0));
    }

    #[test]
    fn one_dim_is_rejected() {
        let alg = RealLieAlgebra::abelian(1);
        assert!(matches!(
            validate_structure_constants(&alg, 1e-9),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn ragged_tensor_is_rejected() {
        let f = vec![vec![vec![0.0; 2]; 2], vec![vec![0.0; 3]; 2]];
        assert!(RealLieAlgebra::from_nested(&f).is_err());
    }

    #[test]
    fn unimodularity() {
        let ab = is_unimodular(&RealLieAlgebra::abelian(4), 1e-12);
        assert!(ab.flag && ab.residual == 0.0);
        let r = is_unimodular(&two_dim(), 1e-12);
        assert!(!r.flag);
        assert_eq!(r.residual, 1.0);
    }

    #[test]
    fn ideals() {
        let full = Subspace::coordinate(4, &[0, 1, 2, 3]).unwrap();
        let rep = verify_abelian_ideal(&RealLieAlgebra::abelian(4), &full, 1e-12).unwrap();
        assert!(rep.is_ideal && rep.is_abelian);

        let line = Subspace::coordinate(2, &[0]).unwrap();
        let rep = verify_abelian_ideal(&two_dim(), &line, 1e-12).unwrap();
        assert!(rep.is_ideal && rep.is_abelian);

        let other = Subspace::coordinate(2, &[1]).unwrap();
        let rep = verify_abelian_ideal(&two_dim(), &other, 1e-12).unwrap();
        assert!(!rep.is_ideal && rep.is_abelian);
    }

    #[test]
    fn rank_deficient_subspace_errors() {
        let m = RMat::from_column_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert!(matches!(Subspace::new(m), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn derived_series_small_cases() {
        let ab = derived_series(&RealLieAlgebra::abelian(4), 1e-10);
        assert_eq!(ab.dims, vec![4, 0]);
        assert_eq!(ab.step, Some(1));
        let two = derived_series(&two_dim(), 1e-10);
        assert_eq!(two.dims, vec![2, 1, 0]);
        assert_eq!(two.step, Some(2));
    }

    #[test]
    fn semisimple_series_never_terminates() {
        // so(3): [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2
        let alg = RealLieAlgebra::abelian(3)
            .with_bracket(0, 1, &[(2, 1.0)])
            .with_bracket(1, 2, &[(0, 1.0)])
            .with_bracket(2, 0, &[(1, 1.0)]);
        let s = derived_series(&alg, 1e-10);
        assert_eq!(s.step, None);
        assert_eq!(s.dims, vec![3, 3]);
    }
}
