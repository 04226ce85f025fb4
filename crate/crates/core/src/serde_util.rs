//! JSON shapes for complex data: every complex number is a `[re, im]` pair.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMat, CVec, RMat};

pub fn cmat_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| [m[(r, c)].re, m[(r, c)].im])
                .collect()
        })
        .collect()
}

pub fn rows_to_cmat(rows: &[Vec<[f64; 2]>], ncols: usize) -> Option<CMat> {
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(CMat::from_fn(rows.len(), ncols, |r, c| {
        Complex64::new(rows[r][c][0], rows[r][c][1])
    }))
}

pub fn rmat_to_rows(m: &RMat) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub fn rows_to_rmat(rows: &[Vec<f64>]) -> Option<RMat> {
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != ncols) {
        return None;
    }
    Some(RMat::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

pub fn cmat<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
    cmat_to_rows(m).serialize(s)
}

pub fn cvec<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
    v.iter()
        .map(|z| [z.re, z.im])
        .collect::<Vec<_>>()
        .serialize(s)
}

pub fn rmat<S: Serializer>(m: &RMat, s: S) -> Result<S::Ok, S::Error> {
    rmat_to_rows(m).serialize(s)
}

pub fn complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn de_cvec<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
    let v: Vec<[f64; 2]> = Vec::deserialize(d)?;
    Ok(CVec::from_iterator(
        v.len(),
        v.iter().map(|p| Complex64::new(p[0], p[1])),
    ))
}
