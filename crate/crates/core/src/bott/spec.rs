use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which sheaf on the base the bundle is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    Line,
    /// Tangent sheaf of a single factor, pulled back to the product.
    TangentOf(usize),
    FullTangent,
}

/// A homogeneous bundle on `P^{m_1}` or `P^{m_1} x P^{m_2}`, twisted by `O(d_1[, d_2])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BundleSpec {
    pub factors: Vec<usize>,
    pub twist: Vec<i64>,
    pub structure: Structure,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("bundle needs one or two factors, got {0}")]
    FactorCount(usize),
    #[error("twist has {twist} entries for {factors} factors")]
    TwistLength { factors: usize, twist: usize },
    #[error("tangent of factor {0} requested, which does not exist or is a point")]
    BadTangentFactor(usize),
}

/// One tensor factor of a summand: a twisted line or twisted tangent sheaf on `P^m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FactorSheaf {
    pub m: usize,
    pub twist: i64,
    pub tangent: bool,
}

impl BundleSpec {
    pub fn line(factors: &[usize], twist: &[i64]) -> Self {
        BundleSpec { factors: factors.to_vec(), twist: twist.to_vec(), structure: Structure::Line }
    }

    pub fn tangent(factors: &[usize], twist: &[i64]) -> Self {
        BundleSpec {
            factors: factors.to_vec(),
            twist: twist.to_vec(),
            structure: Structure::FullTangent,
        }
    }

    pub fn tangent_of(factors: &[usize], twist: &[i64], i: usize) -> Self {
        BundleSpec {
            factors: factors.to_vec(),
            twist: twist.to_vec(),
            structure: Structure::TangentOf(i),
        }
    }

    pub fn validate(&self) -> Result<(), BundleError> {
        if self.factors.is_empty() || self.factors.len() > 2 {
            return Err(BundleError::FactorCount(self.factors.len()));
        }
        if self.twist.len() != self.factors.len() {
            return Err(BundleError::TwistLength {
                factors: self.factors.len(),
                twist: self.twist.len(),
            });
        }
        if let Structure::TangentOf(i) = self.structure {
            if i >= self.factors.len() || self.factors[i] == 0 {
                return Err(BundleError::BadTangentFactor(i));
            }
        }
        Ok(())
    }

    /// Complex dimension of the base.
    pub fn base_dim(&self) -> usize {
        self.factors.iter().sum()
    }

    /// The bundle as a direct sum of external tensor products of factor sheaves.
    /// A tangent summand of a point factor is zero and is omitted.
    pub fn summands(&self) -> Vec<Vec<FactorSheaf>> {
        let plain = |tangent_at: Option<usize>| -> Vec<FactorSheaf> {
            self.factors
                .iter()
                .zip(&self.twist)
                .enumerate()
                .map(|(i, (&m, &d))| FactorSheaf { m, twist: d, tangent: tangent_at == Some(i) })
                .collect()
        };
        match self.structure {
            Structure::Line => vec![plain(None)],
            Structure::TangentOf(i) => vec![plain(Some(i))],
            Structure::FullTangent => (0..self.factors.len())
                .filter(|&i| self.factors[i] > 0)
                .map(|i| plain(Some(i)))
                .collect(),
        }
    }
}
