//! Reference computations done directly in the real basis, without frames or blocks.
#![allow(dead_code)]

use hermlie::codim2_models::{generate, generate_with, CaseTag, Codim2Instance, GeneratorOptions};
use hermlie::complex_frames::FormTerm;
use hermlie::lie_core::RealLieAlgebra;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type M = DMatrix<f64>;
pub type V = DVector<f64>;

/// Orthonormal basis of the span, modified Gram–Schmidt run twice per vector.
pub fn orth(cols: &[V], rel: f64) -> Vec<V> {
    let top = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut q: Vec<V> = Vec::new();
    for c in cols {
        let mut v = c.clone();
        for _ in 0..2 {
            for u in &q {
                let p = u.dot(&v);
                v -= u * p;
            }
        }
        let nv = v.norm();
        if nv > rel * top.max(1e-300) {
            q.push(v / nv);
        }
    }
    q
}

pub fn dist_to_span(q: &[V], b: &V) -> f64 {
    let mut r = b.clone();
    for _ in 0..2 {
        for u in q {
            let p = u.dot(&r);
            r -= u * p;
        }
    }
    r.norm()
}

pub fn bracket(alg: &RealLieAlgebra, i: usize, j: usize) -> V {
    V::from_fn(alg.dim(), |k, _| alg.get(k, i, j))
}

/// `dΩ(b_i, b_j, b_k)` for `i < j < k`, with `dΩ(x,y,z) = −Ω([x,y],z) + Ω([x,z],y) − Ω([y,z],x)`.
pub fn d_two_form(alg: &RealLieAlgebra, om: &M) -> V {
    let d = alg.dim();
    let mut out = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                let w = |u: &V, z: usize| (0..d).map(|r| u[r] * om[(r, z)]).sum::<f64>();
                out.push(
                    -w(&bracket(alg, i, j), k) + w(&bracket(alg, i, k), j)
                        - w(&bracket(alg, j, k), i),
                );
            }
        }
    }
    V::from_vec(out)
}

/// `min over real β with β(J·,J·) = −β of ‖d(ω + β)‖`, `ω(x, y) = g(Jx, y)`.
pub fn hs_oracle(alg: &RealLieAlgebra, j: &M, g: &M) -> f64 {
    let d = alg.dim();
    let omega = j.transpose() * g;
    let mut cols = Vec::new();
    for p in 0..d {
        for q in (p + 1)..d {
            let mut e = M::zeros(d, d);
            e[(p, q)] = 1.0;
            e[(q, p)] = -1.0;
            let b = &e - j.transpose() * &e * j;
            let db = d_two_form(alg, &b);
            // closed β give pure rounding noise, which must not count as a direction
            if db.amax() > 1e-10 * alg.scale().max(1.0) * b.amax() {
                cols.push(db);
            }
        }
    }
    let q = orth(&cols, 1e-10);
    dist_to_span(&q, &d_two_form(alg, &omega))
}

/// `‖dω‖` for `ω(x, y) = g(Jx, y)`.
pub fn kahler_oracle(alg: &RealLieAlgebra, j: &M, g: &M) -> f64 {
    d_two_form(alg, &(j.transpose() * g)).norm()
}

/// Values of a complex 1-form given by 1-based terms on the real basis, using the
/// coframe rows `φ_k`.
pub fn one_form_values(coframe: &DMatrix<Complex64>, terms: &[FormTerm]) -> DVector<Complex64> {
    let dim = coframe.ncols();
    let mut out = DVector::<Complex64>::zeros(dim);
    for t in terms {
        let c = Complex64::new(t.re, t.im);
        let (k, bar) = match (t.p_indices.as_slice(), t.q_indices.as_slice()) {
            ([k], []) => (k - 1, false),
            ([], [k]) => (k - 1, true),
            _ => panic!("not a 1-form term: {t:?}"),
        };
        for r in 0..dim {
            let phi = coframe[(k, r)];
            out[r] += c * if bar { phi.conj() } else { phi };
        }
    }
    out
}

/// `max |dβ(b_p, b_q) − √−1 (φ_i∧φ̄_i)(b_p, b_q)|` with `dβ(x, y) = −β([x, y])`.
pub fn exact_form_oracle(
    alg: &RealLieAlgebra,
    coframe: &DMatrix<Complex64>,
    beta: &[FormTerm],
    i: usize,
) -> f64 {
    let d = alg.dim();
    let bv = one_form_values(coframe, beta);
    let mut worst: f64 = 0.0;
    for p in 0..d {
        for q in (p + 1)..d {
            let br = bracket(alg, p, q);
            let dbeta: Complex64 = -(0..d).map(|r| bv[r] * br[r]).sum::<Complex64>();
            let (a, b) = (coframe[(i, p)], coframe[(i, q)]);
            let target = Complex64::i() * (a * b.conj() - b * a.conj());
            worst = worst.max((dbeta - target).norm());
        }
    }
    worst
}

/// Largest imaginary part of a 1-form on the real basis.
pub fn imaginary_part(coframe: &DMatrix<Complex64>, beta: &[FormTerm]) -> f64 {
    one_form_values(coframe, beta)
        .iter()
        .fold(0.0, |m, z| m.max(z.im.abs()))
}

/// Derived series dimensions from brackets of orthonormal spans.
pub fn derived_dims(alg: &RealLieAlgebra, rel: f64) -> Vec<usize> {
    let d = alg.dim();
    let mut cur: Vec<V> = (0..d)
        .map(|i| V::from_fn(d, |r, _| (r == i) as u8 as f64))
        .collect();
    let mut dims = vec![d];
    while !cur.is_empty() && dims.len() <= d {
        let mut br = Vec::new();
        for a in 0..cur.len() {
            for b in (a + 1)..cur.len() {
                br.push(alg.bracket(&cur[a], &cur[b]));
            }
        }
        let scale = alg.scale().max(1.0);
        let big: Vec<V> = br.into_iter().filter(|v| v.norm() > rel * scale).collect();
        cur = orth(&big, 1e-9);
        dims.push(cur.len());
    }
    dims
}

pub fn q_abs(sigma: f64, delta: f64) -> f64 {
    sigma.abs() / (2f64.sqrt() * (1.0 - delta * delta).sqrt())
}

pub struct Sample {
    pub tag: CaseTag,
    pub n: usize,
    pub seed: u64,
    pub inst: Codim2Instance,
}

/// `per` seeds of every constructible tag for each `n` in `ns`, optionally in random bases.
pub fn suite(ns: &[usize], per: u64, basis_change: bool) -> Vec<Sample> {
    let opts = GeneratorOptions {
        basis_change,
        ..GeneratorOptions::default()
    };
    let mut out = Vec::new();
    for tag in CaseTag::CONSTRUCTIBLE {
        for &n in ns {
            if n == 2 && tag == CaseTag::NaGeneric {
                continue;
            }
            for seed in 0..per {
                let inst = generate_with(tag, n, seed, opts).expect("generator");
                out.push(Sample { tag, n, seed, inst });
            }
        }
    }
    out
}

pub fn one(tag: CaseTag, n: usize, seed: u64) -> Codim2Instance {
    generate(tag, n, seed).expect("generator")
}
