//! Dense linear-algebra helpers shared by every module.
//!
//! Rank decisions go through the SVD with a relative cutoff of
//! `RANK_RTOL * sigma_max`, so subspace arithmetic is consistent everywhere.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, SVD};
use num_complex::Complex64;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type RVec = DVector<f64>;
pub type CVec = DVector<Complex64>;

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_RTOL: f64 = 1e-10;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// Scalars for which the SVD is delegated to faer. The nalgebra bidiagonal iteration
/// returns wrong factors on some rank-deficient inputs (zero leading columns).
pub trait SvdScalar: ComplexField<RealField = f64> + Copy {
    #[doc(hidden)]
    fn faer_svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, Vec<f64>, DMatrix<Self>)>;
}

macro_rules! faer_svd_impl {
    ($t:ty, $re:expr) => {
        impl SvdScalar for $t {
            fn faer_svd(m: &DMatrix<Self>) -> Option<(DMatrix<Self>, Vec<f64>, DMatrix<Self>)> {
                let (r, c) = m.shape();
                let f = faer::Mat::<$t>::from_fn(r, c, |i, j| m[(i, j)]);
                let svd = f.thin_svd().ok()?;
                let k = r.min(c);
                let (u, sv, v) = (svd.U(), svd.S(), svd.V());
                let u = DMatrix::from_fn(r, k, |i, j| u[(i, j)]);
                let v_t = DMatrix::from_fn(k, c, |i, j| ComplexField::conjugate(v[(j, i)]));
                let s = (0..k).map(|i| $re(sv[i])).collect();
                Some((u, s, v_t))
            }
        }
    };
}

faer_svd_impl!(f64, |x: f64| x);
faer_svd_impl!(Complex64, |z: Complex64| z.re);

/// Thin SVD, singular values in decreasing order.
pub fn svd<T: SvdScalar>(m: DMatrix<T>, want_u: bool, want_v: bool) -> SVD<T, Dyn, Dyn> {
    match T::faer_svd(&m) {
        Some((u, s, v_t)) if s.iter().all(|x| x.is_finite()) => SVD {
            u: want_u.then_some(u),
            v_t: want_v.then_some(v_t),
            singular_values: DVector::from_vec(s),
        },
        // non-convergence: nalgebra is still better than nothing
        _ => m.svd(want_u, want_v),
    }
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(cr)
}

/// Singular values and the matching cutoff for rank decisions.
fn cutoff(singular: &[f64]) -> f64 {
    let smax = singular.iter().cloned().fold(0.0, f64::max);
    RANK_RTOL * smax
}

/// Numerical rank of a real matrix.
pub fn rank(m: &RMat) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = svd(m.clone(), false, false).singular_values;
    let s: Vec<f64> = sv.iter().cloned().collect();
    let cut = cutoff(&s);
    if s.iter().cloned().fold(0.0, f64::max) == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > cut).count()
}

/// Orthonormal (Euclidean) basis of the column space.
pub fn column_space(m: &RMat) -> RMat {
    column_space_tol(m, 0.0)
}

/// Column space keeping singular values above both the relative cutoff and `abs_tol`.
pub fn column_space_tol(m: &RMat, abs_tol: f64) -> RMat {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return RMat::zeros(rows, 0);
    }
    let svd = svd(m.clone(), true, false);
    let s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return RMat::zeros(rows, 0);
    }
    let cut = cutoff(&s).max(abs_tol);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > cut).collect();
    RMat::from_fn(rows, keep.len(), |r, k| u[(r, keep[k])])
}

/// Orthonormal basis of the kernel of a real matrix.
pub fn null_space(m: &RMat) -> RMat {
    let cols = m.ncols();
    if cols == 0 {
        return RMat::zeros(0, 0);
    }
    // pad to at least square so that V^T is complete
    let rows = m.nrows().max(cols);
    let mut padded = RMat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = svd(padded, false, true);
    let s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let v_t = svd.v_t.expect("requested V^T");
    let cut = if smax == 0.0 { 0.0 } else { cutoff(&s) };
    let keep: Vec<usize> = (0..s.len())
        .filter(|&i| smax == 0.0 || s[i] <= cut)
        .collect();
    RMat::from_fn(cols, keep.len(), |r, k| v_t[(keep[k], r)])
}

/// Orthonormal basis of the kernel of a complex matrix.
pub fn null_space_c(m: &CMat) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return CMat::zeros(0, 0);
    }
    let rows = m.nrows().max(cols);
    let mut padded = CMat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = svd(padded, false, true);
    let s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let v_t = svd.v_t.expect("requested V^H");
    let cut = if smax == 0.0 { 0.0 } else { cutoff(&s) };
    let keep: Vec<usize> = (0..s.len())
        .filter(|&i| smax == 0.0 || s[i] <= cut)
        .collect();
    // rows of V^H are conjugated right singular vectors
    CMat::from_fn(cols, keep.len(), |r, k| v_t[(keep[k], r)].conj())
}

/// Minimum-norm least-squares solution of `a x = b` via the SVD.
pub fn lstsq(a: &RMat, b: &RVec) -> RVec {
    if a.ncols() == 0 {
        return RVec::zeros(0);
    }
    if a.nrows() == 0 {
        return RVec::zeros(a.ncols());
    }
    let svd = svd(a.clone(), true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return RVec::zeros(a.ncols());
    }
    svd.solve(b, RANK_RTOL * smax)
        .expect("SVD solve with both factors present")
}

/// Minimum-norm least-squares solution of a complex system.
pub fn lstsq_c(a: &CMat, b: &CMat) -> CMat {
    if a.ncols() == 0 {
        return CMat::zeros(0, b.ncols());
    }
    if a.nrows() == 0 {
        return CMat::zeros(a.ncols(), b.ncols());
    }
    let svd = svd(a.clone(), true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return CMat::zeros(a.ncols(), b.ncols());
    }
    svd.solve(b, RANK_RTOL * smax)
        .expect("SVD solve with both factors present")
}

/// Orthonormal basis of `span(u) ∩ span(w)`.
pub fn intersect(u: &RMat, w: &RMat) -> RMat {
    let n = u.nrows();
    if u.ncols() == 0 || w.ncols() == 0 {
        return RMat::zeros(n, 0);
    }
    let mut stacked = RMat::zeros(n, u.ncols() + w.ncols());
    stacked.view_mut((0, 0), (n, u.ncols())).copy_from(u);
    stacked
        .view_mut((0, u.ncols()), (n, w.ncols()))
        .copy_from(&(-w));
    let ker = null_space(&stacked);
    let coeffs = ker.rows(0, u.ncols()).into_owned();
    column_space(&(u * coeffs))
}

/// Orthonormal basis of `span(u) + span(w)`.
pub fn sum(u: &RMat, w: &RMat) -> RMat {
    let n = u.nrows();
    let mut stacked = RMat::zeros(n, u.ncols() + w.ncols());
    stacked.view_mut((0, 0), (n, u.ncols())).copy_from(u);
    stacked
        .view_mut((0, u.ncols()), (n, w.ncols()))
        .copy_from(w);
    column_space(&stacked)
}

/// Vectors of `span(u)` that are `g`-orthogonal to `span(w)`.
pub fn orth_complement_within(u: &RMat, w: &RMat, g: &RMat) -> RMat {
    if w.ncols() == 0 {
        return column_space(u);
    }
    // w^T g u c = 0
    let constraint = w.transpose() * g * u;
    let ker = null_space(&constraint);
    column_space(&(u * ker))
}

/// Euclidean distance of `v` from `span(q)` where `q` has orthonormal columns.
pub fn distance_to_span(q: &RMat, v: &RVec) -> f64 {
    if q.ncols() == 0 {
        return v.norm();
    }
    let proj = q * (q.transpose() * v);
    (v - proj).norm()
}

/// Orthonormalize columns with respect to the real inner product `g`.
pub fn g_orthonormalize(basis: &RMat, g: &RMat) -> RMat {
    let n = basis.nrows();
    let mut out: Vec<RVec> = Vec::new();
    for k in 0..basis.ncols() {
        let mut v = basis.column(k).into_owned();
        for _ in 0..2 {
            for q in &out {
                let p = (q.transpose() * g * &v)[(0, 0)];
                v -= q * p;
            }
        }
        let nrm = (v.transpose() * g * &v)[(0, 0)].max(0.0).sqrt();
        if nrm > 1e-12 {
            out.push(v / nrm);
        }
    }
    RMat::from_fn(n, out.len(), |r, k| out[k][r])
}

pub fn g_dot(g: &RMat, u: &RVec, v: &RVec) -> f64 {
    (u.transpose() * g * v)[(0, 0)]
}

/// Hermitian pairing `u^T g conj(v)` on the complexification.
pub fn h_dot(g: &CMat, u: &CVec, v: &CVec) -> Complex64 {
    (u.transpose() * g * v.map(|z| z.conj()))[(0, 0)]
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn trace_c(m: &CMat) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Real 2x2-block companion of a complex matrix: `z ↦ (Re z, Im z)`.
pub fn realify(a: &CMat) -> RMat {
    let (r, k) = a.shape();
    let mut out = RMat::zeros(2 * r, 2 * k);
    for i in 0..r {
        for j in 0..k {
            let z = a[(i, j)];
            out[(2 * i, 2 * j)] = z.re;
            out[(2 * i, 2 * j + 1)] = -z.im;
            out[(2 * i + 1, 2 * j)] = z.im;
            out[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    out
}

pub fn is_finite_c(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn frobenius_c(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn hermitian_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let herm = (m + m.adjoint()) * cr(0.5);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMat::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

/// Rotate each column so that its first significant entry is real positive.
pub fn fix_phases(q: &mut CMat) {
    for k in 0..q.ncols() {
        let col_norm = q.column(k).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if col_norm == 0.0 {
            continue;
        }
        if let Some(z) = q
            .column(k)
            .iter()
            .find(|z| z.norm() > 1e-8 * col_norm)
            .cloned()
        {
            let phase = z.conj() / cr(z.norm());
            for r in 0..q.nrows() {
                q[(r, k)] *= phase;
            }
        }
    }
}

pub fn abs_c(z: Complex64) -> f64 {
    ComplexField::abs(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_space() {
        let m = RMat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert_eq!(rank(&m), 1);
        let k = null_space(&m);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&m * &k)) < 1e-12);
        assert_eq!(rank(&RMat::zeros(3, 3)), 0);
    }

    #[test]
    fn intersection_of_planes() {
        let u = RMat::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let w = RMat::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let x = intersect(&u, &w);
        assert_eq!(x.ncols(), 1);
        assert!((x[(1, 0)].abs() - 1.0).abs() < 1e-12);
        assert_eq!(sum(&u, &w).ncols(), 3);
    }

    #[test]
    fn min_norm_lstsq() {
        let a = RMat::from_row_slice(1, 2, &[1.0, 1.0]);
        let x = lstsq(&a, &RVec::from_vec(vec![2.0]));
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_kernel() {
        let a = CMat::from_row_slice(1, 2, &[c(1.0, 0.0), c(0.0, 1.0)]);
        let k = null_space_c(&a);
        assert_eq!(k.ncols(), 1);
        assert!(max_abs_c(&(&a * &k)) < 1e-12);
    }

    #[test]
    fn eigh_sorted() {
        let m = CMat::from_row_slice(2, 2, &[cr(2.0), I, -I, cr(2.0)]);
        let (vals, vecs) = hermitian_eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let d = vecs.adjoint() * &m * &vecs;
        assert!((d[(0, 1)]).norm() < 1e-12);
    }
}
