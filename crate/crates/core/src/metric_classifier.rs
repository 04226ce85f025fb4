//! Metric classes and the Hermitian-symplectic test.
//!
//! A metric is Hermitian-symplectic iff some `(2,0)`-form `α` makes
//! `Ω = α + ω + ᾱ` closed. Writing `α = Σ_{i<k} S_{ik} φ_i∧φ_k` turns this into
//! a complex-linear system in the entries of the skew matrix `S`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::complex_frames::{torsion_tensor, Differential, InvariantForm, UnitaryFrame};
use crate::error::{Error, Result};
use crate::linalg::{self, cr, CMat, RMat, RVec, I};

pub const DEFAULT_HS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct MetricFlags {
    pub kahler: bool,
    pub pluriclosed: bool,
    pub balanced: bool,
    pub residuals: BTreeMap<String, f64>,
}

pub fn classify_metric(frame: &UnitaryFrame, tol: f64) -> MetricFlags {
    let n = frame.n();
    let d = Differential::new(frame);
    let omega = InvariantForm::kahler(n);
    let d_omega = d.apply(&omega).expect("same frame");
    let ddbar = d
        .apply(&d_omega.component(1, 2))
        .expect("same frame")
        .component(2, 2);
    let mut power = InvariantForm::monomial(n, &[], &[], cr(1.0)).expect("empty monomial");
    for _ in 1..n {
        power = power.wedge(&omega);
    }
    let d_power = d.apply(&power).expect("same frame");

    let r_k = d_omega.norm();
    let r_p = ddbar.norm();
    let r_b = d_power.norm();
    let kahler = r_k <= tol;
    let mut residuals = BTreeMap::new();
    residuals.insert("d_omega".to_string(), r_k);
    residuals.insert("ddbar_omega".to_string(), r_p);
    residuals.insert("d_omega_pow_n_minus_1".to_string(), r_b);
    MetricFlags {
        kahler,
        pluriclosed: kahler || r_p <= tol,
        balanced: kahler || r_b <= tol,
        residuals,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HSCertificate {
    #[serde(serialize_with = "crate::serde_util::cmat")]
    pub s: CMat,
    pub eq_residual: f64,
    pub closure_residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Infeasibility {
    /// Relative least-squares residual of the linear system.
    pub min_residual: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HsOutcome {
    Feasible(HSCertificate),
    Infeasible(Infeasibility),
}

impl HsOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, HsOutcome::Feasible(_))
    }

    pub fn certificate(&self) -> Option<&HSCertificate> {
        match self {
            HsOutcome::Feasible(c) => Some(c),
            HsOutcome::Infeasible(_) => None,
        }
    }

    /// Relative residual in both cases.
    pub fn relative_residual(&self) -> f64 {
        match self {
            HsOutcome::Feasible(c) => c.eq_residual,
            HsOutcome::Infeasible(r) => r.min_residual,
        }
    }
}

/// Index of the unknown `s_{ab}` (`a < b`) and the sign of `S_{ri}` relative to it.
fn skew_slot(n: usize, r: usize, i: usize) -> Option<(usize, f64)> {
    if r == i {
        return None;
    }
    let (a, b, sign) = if r < i { (r, i, 1.0) } else { (i, r, -1.0) };
    // pairs ordered (0,1), (0,2), …, (1,2), …
    let idx = a * (2 * n - a - 1) / 2 + (b - a - 1);
    Some((idx, sign))
}

/// Real form of a set of complex-linear equations `Σ κ_p s_p = rhs`.
struct RealSystem {
    unknowns: usize,
    rows: Vec<(Vec<Complex64>, Complex64)>,
}

impl RealSystem {
    fn new(unknowns: usize) -> Self {
        Self {
            unknowns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, coeffs: Vec<Complex64>, rhs: Complex64) {
        self.rows.push((coeffs, rhs));
    }

    fn matrices(&self) -> (RMat, RVec) {
        let m = self.rows.len();
        let mut a = RMat::zeros(2 * m, 2 * self.unknowns);
        let mut b = RVec::zeros(2 * m);
        for (r, (coeffs, rhs)) in self.rows.iter().enumerate() {
            for (p, k) in coeffs.iter().enumerate() {
                a[(2 * r, 2 * p)] = k.re;
                a[(2 * r, 2 * p + 1)] = -k.im;
                a[(2 * r + 1, 2 * p)] = k.im;
                a[(2 * r + 1, 2 * p + 1)] = k.re;
            }
            b[2 * r] = rhs.re;
            b[2 * r + 1] = rhs.im;
        }
        (a, b)
    }
}

/// Both equation families for the entries of `S`, as complex rows.
fn hs_system(frame: &UnitaryFrame) -> RealSystem {
    let n = frame.n();
    let unknowns = n * n.saturating_sub(1) / 2;
    let c = frame.c();
    let d = frame.d();
    let t = torsion_tensor(frame);
    let mut sys = RealSystem::new(unknowns);
    let zero = || vec![cr(0.0); unknowns];

    // Σ_r (S_ri C^r_jk + S_rj C^r_ki + S_rk C^r_ij) = 0, totally antisymmetric in (i,j,k)
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let mut row = zero();
                for r in 0..n {
                    for (col, coef) in [
                        (i, c.get(r, j, k)),
                        (j, c.get(r, k, i)),
                        (k, c.get(r, i, j)),
                    ] {
                        if let Some((p, s)) = skew_slot(n, r, col) {
                            row[p] += coef * s;
                        }
                    }
                }
                sys.push(row, cr(0.0));
            }
        }
    }
    // Σ_r (S_rk conj(D^i_rj) − S_ri conj(D^k_rj)) = −√−1 T^j_ik, antisymmetric in (i,k)
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n {
                let mut row = zero();
                for r in 0..n {
                    if let Some((p, s)) = skew_slot(n, r, k) {
                        row[p] += d.get(i, r, j).conj() * s;
                    }
                    if let Some((p, s)) = skew_slot(n, r, i) {
                        row[p] -= d.get(k, r, j).conj() * s;
                    }
                }
                sys.push(row, -I * t.get(j, i, k));
            }
        }
    }
    sys
}

fn unpack_skew(n: usize, x: &RVec) -> CMat {
    let mut s = CMat::zeros(n, n);
    for a in 0..n {
        for b in (a + 1)..n {
            let (p, _) = skew_slot(n, a, b).expect("a != b");
            let z = Complex64::new(x[2 * p], x[2 * p + 1]);
            s[(a, b)] = z;
            s[(b, a)] = -z;
        }
    }
    s
}

/// Least-squares solve of the Hermitian-symplectic system.
pub fn hs_solve(frame: &UnitaryFrame, tol: f64) -> HsOutcome {
    let n = frame.n();
    let sys = hs_system(frame);
    let (a, b) = sys.matrices();
    let x = if a.nrows() == 0 {
        RVec::zeros(a.ncols())
    } else {
        linalg::lstsq(&a, &b)
    };
    let resid = if a.nrows() == 0 {
        RVec::zeros(0)
    } else {
        &a * &x - &b
    };
    let abs_res = complex_max(&resid);
    let rhs_scale = complex_max(&b).max(1.0);
    let rel = abs_res / rhs_scale;
    if rel <= tol {
        let s = unpack_skew(n, &x);
        let closure = hs_verify(frame, &s).expect("square skew matrix");
        HsOutcome::Feasible(HSCertificate {
            s,
            eq_residual: rel,
            closure_residual: closure,
            tol,
        })
    } else {
        HsOutcome::Infeasible(Infeasibility {
            min_residual: rel,
            tol,
        })
    }
}

/// Max modulus over consecutive (re, im) pairs.
fn complex_max(v: &RVec) -> f64 {
    (0..v.len() / 2)
        .map(|r| v[2 * r].hypot(v[2 * r + 1]))
        .fold(0.0, f64::max)
}

/// `α = Σ_{i<k} S_ik φ_i∧φ_k`.
pub fn two_zero_form(s: &CMat) -> InvariantForm {
    let n = s.nrows();
    let mut alpha = InvariantForm::zero(n);
    for i in 0..n {
        for k in (i + 1)..n {
            alpha.add_term((1 << i) | (1 << k), s[(i, k)]);
        }
    }
    alpha
}

/// `‖dΩ‖` with `Ω = α + ω + ᾱ`, computed directly from the differential.
pub fn hs_verify(frame: &UnitaryFrame, s: &CMat) -> Result<f64> {
    let n = frame.n();
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::Dimension(format!(
            "S is {}x{}, frame has n = {n}",
            s.nrows(),
            s.ncols()
        )));
    }
    let alpha = two_zero_form(s);
    let omega = alpha.add(&InvariantForm::kahler(n)).add(&alpha.conj());
    Ok(Differential::new(frame).apply(&omega)?.norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactWitness {
    /// 0-based index `i` of the exact form `√−1 φ_i∧φ̄_i`.
    pub index: usize,
    /// Real 1-form `β` with `dβ = √−1 φ_i∧φ̄_i`.
    pub beta: InvariantForm,
    pub residual: f64,
}

/// First `i` for which `√−1 φ_i∧φ̄_i` is the differential of an invariant real 1-form.
pub fn positive_exact_obstruction(frame: &UnitaryFrame, tol: f64) -> Option<ExactWitness> {
    let n = frame.n();
    let d = Differential::new(frame);
    // real basis of invariant real 1-forms: φ_k + φ̄_k and √−1(φ_k − φ̄_k)
    let mut basis: Vec<(InvariantForm, InvariantForm)> = Vec::with_capacity(2 * n);
    for k in 0..n {
        let phi = InvariantForm::phi(n, k);
        let bar = InvariantForm::phibar(n, k);
        let re = phi.add(&bar);
        let im = phi.sub(&bar).scale(I);
        let dre = d.apply(&re).expect("same frame");
        let dim = d.apply(&im).expect("same frame");
        basis.push((re, dre));
        basis.push((im, dim));
    }
    let mut masks: Vec<u64> = basis
        .iter()
        .flat_map(|(_, db)| db.raw_terms().map(|(m, _)| m).collect::<Vec<_>>())
        .collect();
    for i in 0..n {
        masks.push((1 << i) | (1 << (n + i)));
    }
    masks.sort_unstable();
    masks.dedup();
    let row_of = |m: u64| masks.binary_search(&m).expect("collected mask");

    let mut a = RMat::zeros(2 * masks.len(), 2 * n);
    for (col, (_, db)) in basis.iter().enumerate() {
        for (m, z) in db.raw_terms() {
            let r = row_of(m);
            a[(2 * r, col)] = z.re;
            a[(2 * r + 1, col)] = z.im;
        }
    }
    for i in 0..n {
        let target = InvariantForm::monomial(n, &[i], &[i], I).expect("valid index");
        let mut b = RVec::zeros(2 * masks.len());
        for (m, z) in target.raw_terms() {
            let r = row_of(m);
            b[2 * r] = z.re;
            b[2 * r + 1] = z.im;
        }
        let x = linalg::lstsq(&a, &b);
        let residual = (&a * &x - &b).norm();
        if residual <= tol {
            let mut beta = InvariantForm::zero(n);
            for (col, (form, _)) in basis.iter().enumerate() {
                beta = beta.add(&form.scale(cr(x[col])));
            }
            return Some(ExactWitness {
                index: i,
                beta: beta.pruned(1e-15),
                residual,
            });
        }
    }
    None
}
