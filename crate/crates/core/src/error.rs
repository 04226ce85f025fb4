use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("rank-deficient basis: {got} independent columns out of {expected}")]
    RankDeficient { expected: usize, got: usize },

    #[error("J is not an almost-complex structure: |J^2 + I| = {0:.3e}")]
    NotAlmostComplex(f64),

    #[error("J is not integrable: Nijenhuis residual {0:.3e}")]
    NotIntegrable(f64),

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("metric is not compatible with J: |J^T g J - g| = {0:.3e}")]
    NotCompatible(f64),

    #[error("frame is not a basis of g^(1,0): {0}")]
    BadFrame(String),

    #[error("malformed form index: {0}")]
    MalformedIndex(String),

    #[error("subspace is not an abelian ideal (ideal residual {ideal:.3e}, abelian residual {abelian:.3e})")]
    NotAbelianIdeal { ideal: f64, abelian: f64 },

    #[error("ideal has codimension {0}, expected 2")]
    WrongCodimension(usize),

    #[error("J preserves the ideal (Ja = a); this case is excluded")]
    JPreservesIdeal,

    #[error("Lie algebra is not unimodular: max |tr ad| = {0:.3e}")]
    NotUnimodular(f64),

    #[error("parameter relation {relation} violated (residual {residual:.3e})")]
    ParameterRelation { relation: String, residual: f64 },

    #[error("generator failed: {0}")]
    Generation(String),

    #[error("no constructor: r0 = 2 unsupported")]
    UnsupportedTag,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("v is not in the image of Y (residual {0:.3e}); the certificate is inconsistent")]
    NotInImage(f64),

    #[error("Y blocks do not commute: |[Y1, Y2]| = {0:.3e}")]
    NonCommuting(f64),

    #[error("frame change is not unitary: |U U* - I| = {0:.3e}")]
    NonUnitary(f64),

    #[error("unexpected Hermitian-symplectic certificate for case {0}")]
    UnexpectedFeasibility(String),
}

pub type Result<T> = std::result::Result<T, Error>;
