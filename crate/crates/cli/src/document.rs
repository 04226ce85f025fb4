//! The JSON document exchanged by every command.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};

use hermlie::codim2_models::{Codim2Instance, Codim2Params};
use hermlie::complex_frames::{ComplexStructure, HermitianMetric};
use hermlie::lie_core::{RealLieAlgebra, Subspace};
use hermlie::linalg::RMat;
use hermlie::serde_util::{rmat_to_rows, rows_to_rmat};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub schema_version: String,
    pub dim: usize,
    /// `f[k][i][j]` is the `b_k` coefficient of `[b_i, b_j]`.
    pub f: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "J")]
    pub j: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    /// One row per basis vector of the abelian ideal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal_basis: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Codim2Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

/// Parsed and validated library objects.
pub struct Loaded {
    pub alg: RealLieAlgebra,
    pub j: ComplexStructure,
    pub g: HermitianMetric,
    pub ideal: Option<Subspace>,
}

impl Loaded {
    pub fn ideal(&self) -> Result<&Subspace> {
        self.ideal
            .as_ref()
            .context("document has no ideal_basis; the codimension-2 pipeline needs one")
    }
}

impl AlgebraDocument {
    pub fn from_instance(inst: &Codim2Instance, seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            dim: inst.alg.dim(),
            f: inst.alg.to_nested(),
            j: rmat_to_rows(inst.j.matrix()),
            g: rmat_to_rows(inst.g.matrix()),
            ideal_basis: Some(inst.ideal.to_vectors()),
            params: Some(inst.params.clone()),
            provenance: Some(Provenance {
                generator: format!("hermlie-cli {}", env!("CARGO_PKG_VERSION")),
                seed,
            }),
        }
    }

    /// Same algebra and `J`, new metric.
    pub fn with_metric(&self, g: &RMat) -> Self {
        Self {
            g: rmat_to_rows(g),
            params: None,
            ..self.clone()
        }
    }

    pub fn check_shapes(&self) -> Result<()> {
        let d = self.dim;
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {:?}, expected {SCHEMA_VERSION:?}",
            self.schema_version
        );
        ensure!(
            d >= 2 && d % 2 == 0,
            "dim must be even and at least 2, got {d}"
        );
        let square = |m: &[Vec<f64>]| m.len() == d && m.iter().all(|r| r.len() == d);
        ensure!(
            self.f.len() == d && self.f.iter().all(|s| square(s)),
            "f must have shape {d}x{d}x{d}"
        );
        ensure!(square(&self.j), "J must be {d}x{d}");
        ensure!(square(&self.g), "g must be {d}x{d}");
        if let Some(b) = &self.ideal_basis {
            ensure!(
                b.iter().all(|r| r.len() == d),
                "every ideal_basis row must have length {d}"
            );
        }
        Ok(())
    }

    pub fn load(&self) -> Result<Loaded> {
        self.check_shapes()?;
        let alg = RealLieAlgebra::from_nested(&self.f)?;
        let j = ComplexStructure::new(rows_to_rmat(&self.j).context("J rows")?)?;
        let g = HermitianMetric::new(rows_to_rmat(&self.g).context("g rows")?, &j)?;
        let ideal = match &self.ideal_basis {
            Some(rows) if rows.is_empty() => bail!("ideal_basis is empty"),
            Some(rows) => Some(Subspace::from_vectors(rows)?),
            None => None,
        };
        Ok(Loaded { alg, j, g, ideal })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).context("malformed algebra document")?;
        doc.check_shapes()?;
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(self).expect("documents always serialize")
    }
}
