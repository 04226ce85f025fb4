//! Left-invariant complex forms in a unitary coframe.
//!
//! A monomial is a bitmask: bit `i < n` is `φ_i`, bit `n + i` is `φ̄_i`.
//! Reading the bits in ascending order gives the canonical wedge order, so
//! holomorphic factors always come first.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CTensor, UnitaryFrame};
use crate::error::{Error, Result};
use crate::linalg::{cr, I};

/// Sign of `m1 ∧ m2` relative to the canonical order of `m1 | m2`.
#[inline]
fn wedge_sign(m1: u64, m2: u64) -> Option<f64> {
    if m1 & m2 != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = m2;
    while rest != 0 {
        let b = rest.trailing_zeros();
        swaps += (m1 >> b).count_ones();
        rest &= rest - 1;
    }
    Some(if swaps % 2 == 0 { 1.0 } else { -1.0 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantForm {
    n: usize,
    terms: BTreeMap<u64, Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormTerm {
    pub p_indices: Vec<usize>,
    pub q_indices: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

impl InvariantForm {
    pub fn zero(n: usize) -> Self {
        assert!(n <= 32, "at most 32 frame vectors are supported");
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn phi(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.add_term(1 << i, cr(1.0));
        f
    }

    pub fn phibar(n: usize, i: usize) -> Self {
        let mut f = Self::zero(n);
        f.add_term(1 << (n + i), cr(1.0));
        f
    }

    /// `√−1 Σ φ_i ∧ φ̄_i`.
    pub fn kahler(n: usize) -> Self {
        let mut f = Self::zero(n);
        for i in 0..n {
            f.add_term((1 << i) | (1 << (n + i)), I);
        }
        f
    }

    /// Single monomial from 0-based index lists, sorted with sign tracking.
    pub fn monomial(n: usize, p: &[usize], q: &[usize], coef: Complex64) -> Result<Self> {
        let mut f = Self::zero(n);
        let mut mask = 0u64;
        let mut sign = 1.0;
        let bits = p.iter().map(|&i| (i, 0)).chain(q.iter().map(|&i| (i, n)));
        for (i, offset) in bits {
            if i >= n {
                return Err(Error::MalformedIndex(format!(
                    "index {} outside 1..={n}",
                    i + 1
                )));
            }
            let bit = 1u64 << (i + offset);
            match wedge_sign(mask, bit) {
                Some(s) => sign *= s,
                None => return Ok(f),
            }
            mask |= bit;
        }
        f.add_term(mask, coef * sign);
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mask: u64, coef: Complex64) {
        if coef == cr(0.0) {
            return;
        }
        let entry = self.terms.entry(mask).or_insert(cr(0.0));
        *entry += coef;
        if *entry == cr(0.0) {
            self.terms.remove(&mask);
        }
    }

    /// Coefficient of the canonical monomial with the given 0-based indices.
    pub fn coefficient(&self, p: &[usize], q: &[usize]) -> Complex64 {
        let mask = p.iter().fold(0u64, |m, &i| m | 1 << i)
            | q.iter().fold(0u64, |m, &i| m | 1 << (self.n + i));
        self.terms.get(&mask).cloned().unwrap_or(cr(0.0))
    }

    pub fn raw_terms(&self) -> impl Iterator<Item = (u64, Complex64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.n);
        for (&m, &c) in &self.terms {
            out.add_term(m, c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(cr(-1.0)))
    }

    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (&m1, &c1) in &self.terms {
            for (&m2, &c2) in &other.terms {
                if let Some(s) = wedge_sign(m1, m2) {
                    out.add_term(m1 | m2, c1 * c2 * s);
                }
            }
        }
        out
    }

    /// Complex conjugate: `c φ_P ∧ φ̄_Q ↦ c̄ φ̄_P ∧ φ_Q`, reordered.
    pub fn conj(&self) -> Self {
        let n = self.n;
        let low = (1u64 << n) - 1;
        let mut out = Self::zero(n);
        for (&m, &c) in &self.terms {
            let p = m & low;
            let q = m >> n;
            let s = if (p.count_ones() * q.count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            out.add_term(q | (p << n), c.conj() * s);
        }
        out
    }

    pub fn bidegree_of(&self, mask: u64) -> (usize, usize) {
        let low = (1u64 << self.n) - 1;
        (
            (mask & low).count_ones() as usize,
            (mask >> self.n).count_ones() as usize,
        )
    }

    /// The `(p, q)` component.
    pub fn component(&self, p: usize, q: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (&m, &c) in &self.terms {
            if self.bidegree_of(m) == (p, q) {
                out.add_term(m, c);
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    /// Drops coefficients below `eps` in modulus.
    pub fn pruned(&self, eps: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (&m, &c) in &self.terms {
            if c.norm() > eps {
                out.add_term(m, c);
            }
        }
        out
    }

    pub fn to_terms(&self) -> Vec<FormTerm> {
        let n = self.n;
        self.terms
            .iter()
            .map(|(&m, &c)| FormTerm {
                p_indices: (0..n).filter(|&i| m >> i & 1 == 1).map(|i| i + 1).collect(),
                q_indices: (0..n)
                    .filter(|&i| m >> (n + i) & 1 == 1)
                    .map(|i| i + 1)
                    .collect(),
                re: c.re,
                im: c.im,
            })
            .collect()
    }

    /// Parses 1-based terms; unsorted indices are reordered with sign.
    pub fn from_terms(n: usize, terms: &[FormTerm]) -> Result<Self> {
        let mut out = Self::zero(n);
        for t in terms {
            let shift = |v: &[usize]| -> Result<Vec<usize>> {
                v.iter()
                    .map(|&i| {
                        if i == 0 || i > n {
                            Err(Error::MalformedIndex(format!("index {i} outside 1..={n}")))
                        } else {
                            Ok(i - 1)
                        }
                    })
                    .collect()
            };
            let p = shift(&t.p_indices)?;
            let q = shift(&t.q_indices)?;
            out = out.add(&Self::monomial(n, &p, &q, Complex64::new(t.re, t.im))?);
        }
        Ok(out)
    }
}

impl Serialize for InvariantForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_terms().serialize(s)
    }
}

/// `d` on invariant forms, stored as the images of the 2n generators.
#[derive(Debug, Clone)]
pub struct Differential {
    n: usize,
    generators: Vec<InvariantForm>,
}

impl Differential {
    pub fn new(frame: &UnitaryFrame) -> Self {
        Self::from_tensors(frame.c(), frame.d())
    }

    /// `dφ_i = −Σ_{j<k} C^i_{jk} φ_j∧φ_k − Σ_{j,k} conj(D^j_{ik}) φ_j∧φ̄_k`, `dφ̄_i = conj(dφ_i)`.
    pub fn from_tensors(c: &CTensor, d: &CTensor) -> Self {
        let n = c.n();
        let mut holo = Vec::with_capacity(n);
        for i in 0..n {
            let mut f = InvariantForm::zero(n);
            for j in 0..n {
                for k in (j + 1)..n {
                    f.add_term((1 << j) | (1 << k), -c.get(i, j, k));
                }
                for k in 0..n {
                    f.add_term((1 << j) | (1 << (n + k)), -d.get(j, i, k).conj());
                }
            }
            holo.push(f);
        }
        let anti: Vec<InvariantForm> = holo.iter().map(|f| f.conj()).collect();
        let mut generators = holo;
        generators.extend(anti);
        Self { n, generators }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `d` of the generator with the given bit.
    pub fn of_generator(&self, bit: usize) -> &InvariantForm {
        &self.generators[bit]
    }

    pub fn apply(&self, form: &InvariantForm) -> Result<InvariantForm> {
        if form.n() != self.n {
            return Err(Error::MalformedIndex(format!(
                "form over {} frame vectors applied in a frame of {}",
                form.n(),
                self.n
            )));
        }
        let mut out = InvariantForm::zero(self.n);
        for (mask, coef) in form.raw_terms() {
            let mut rest = mask;
            let mut r = 0;
            while rest != 0 {
                let bit = rest.trailing_zeros() as usize;
                let below = mask & ((1u64 << bit) - 1);
                let above = mask & !((1u64 << (bit + 1)) - 1);
                let sign_r = if r % 2 == 0 { 1.0 } else { -1.0 };
                for (m, c) in self.generators[bit].raw_terms() {
                    let Some(s1) = wedge_sign(below, m) else {
                        continue;
                    };
                    let Some(s2) = wedge_sign(below | m, above) else {
                        continue;
                    };
                    out.add_term(below | m | above, coef * c * (sign_r * s1 * s2));
                }
                rest &= rest - 1;
                r += 1;
            }
        }
        Ok(out)
    }
}

/// Chevalley–Eilenberg differential of an invariant form in the given frame.
pub fn ce_differential(form: &InvariantForm, frame: &UnitaryFrame) -> Result<InvariantForm> {
    Differential::new(frame).apply(form)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_signs() {
        assert_eq!(wedge_sign(0b01, 0b10), Some(1.0));
        assert_eq!(wedge_sign(0b10, 0b01), Some(-1.0));
        assert_eq!(wedge_sign(0b1, 0b1), None);
        // φ_2 ∧ (φ_1 ∧ φ_3): one swap
        assert_eq!(wedge_sign(0b010, 0b101), Some(-1.0));
    }

    #[test]
    fn monomial_sorting_tracks_sign() {
        let a = InvariantForm::monomial(3, &[2, 0], &[], cr(1.0)).unwrap();
        assert_eq!(a.coefficient(&[0, 2], &[]), cr(-1.0));
        let z = InvariantForm::monomial(3, &[1, 1], &[], cr(1.0)).unwrap();
        assert!(z.is_zero());
        assert!(InvariantForm::monomial(2, &[2], &[], cr(1.0)).is_err());
    }

    #[test]
    fn wedge_is_graded_commutative() {
        let n = 3;
        let a = InvariantForm::phi(n, 0).add(&InvariantForm::phibar(n, 2).scale(I));
        let b = InvariantForm::phi(n, 1).wedge(&InvariantForm::phibar(n, 0));
        // deg a = 1, deg b = 2: a∧b = b∧a
        assert_eq!(a.wedge(&b), b.wedge(&a));
        let c = InvariantForm::phibar(n, 1);
        assert_eq!(a.wedge(&c), c.wedge(&a).scale(cr(-1.0)));
    }

    #[test]
    fn conjugation_is_an_involution() {
        let n = 2;
        let w = InvariantForm::kahler(n);
        // ω is real
        assert_eq!(w.conj(), w);
        let f = InvariantForm::monomial(n, &[0, 1], &[0], Complex64::new(1.0, 2.0)).unwrap();
        assert_eq!(f.conj().conj(), f);
        assert_eq!(
            f.conj().bidegree_of(f.conj().raw_terms().next().unwrap().0),
            (1, 2)
        );
    }

    #[test]
    fn term_round_trip() {
        let f = InvariantForm::monomial(4, &[0, 3], &[1], Complex64::new(0.5, -1.5)).unwrap();
        let g = InvariantForm::from_terms(4, &f.to_terms()).unwrap();
        assert_eq!(f, g);
        let t = f.to_terms();
        assert_eq!(t[0].p_indices, vec![1, 4]);
        assert_eq!(t[0].q_indices, vec![2]);
        let bad = FormTerm {
            p_indices: vec![0],
            q_indices: vec![],
            re: 1.0,
            im: 0.0,
        };
        assert!(matches!(
            InvariantForm::from_terms(2, &[bad]),
            Err(Error::MalformedIndex(_))
        ));
    }
}
