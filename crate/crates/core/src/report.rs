use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Grid;

/// Inequalities with an evaluation harness, keyed by their short ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    /// Derivatives of one dyadic block scale like `2^{jk}`.
    #[serde(rename = "2.1")]
    Bernstein,
    /// Inhomogeneous norm versus Morrey norm plus homogeneous norm.
    #[serde(rename = "2.3")]
    Equivalence,
    /// `Ṅ^s_{p,q,r}` into `Ḃ^{s-n/p}_{∞,r}`.
    #[serde(rename = "2.4")]
    Embedding,
    /// Product estimate in the algebra range.
    #[serde(rename = "2.5")]
    Algebra,
    /// Morrey norms are unchanged by volume-preserving maps.
    #[serde(rename = "3.1")]
    Composition,
    /// Logarithmic bound of the sup norm.
    #[serde(rename = "3.2")]
    LogInequality,
    /// Moser-type product estimates.
    #[serde(rename = "3.3")]
    Moser,
    /// Commutator estimate with an inhomogeneous norm of the advector.
    #[serde(rename = "3.4")]
    Commutator,
    /// Commutator estimate with `Ṅ^{s+1}` of the advector, for `s > -1`.
    #[serde(rename = "3.5")]
    CommutatorLowRegularity,
}

impl LemmaId {
    pub const ALL: [LemmaId; 9] = [
        LemmaId::Bernstein,
        LemmaId::Equivalence,
        LemmaId::Embedding,
        LemmaId::Algebra,
        LemmaId::Composition,
        LemmaId::LogInequality,
        LemmaId::Moser,
        LemmaId::Commutator,
        LemmaId::CommutatorLowRegularity,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LemmaId::Bernstein => "2.1",
            LemmaId::Equivalence => "2.3",
            LemmaId::Embedding => "2.4",
            LemmaId::Algebra => "2.5",
            LemmaId::Composition => "3.1",
            LemmaId::LogInequality => "3.2",
            LemmaId::Moser => "3.3",
            LemmaId::Commutator => "3.4",
            LemmaId::CommutatorLowRegularity => "3.5",
        }
    }
}

impl std::fmt::Display for LemmaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaId::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownLemma {
                given: s.into(),
                known: LemmaId::ALL
                    .iter()
                    .map(|l| l.as_str())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub dim: usize,
    pub size: usize,
    pub length: f64,
}

impl From<&Grid> for GridSummary {
    fn from(g: &Grid) -> Self {
        Self {
            dim: g.dim,
            size: g.size,
            length: g.length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsTerm {
    pub name: String,
    pub value: f64,
}

/// One evaluation of an inequality `lhs <= C · Σ rhs_terms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub lemma: String,
    pub lhs: f64,
    pub rhs_terms: Vec<RhsTerm>,
    /// `lhs / Σ rhs_terms`; 0 when both sides vanish.
    #[serde(rename = "ratio")]
    pub empirical_constant: f64,
    pub params: serde_json::Value,
    pub grid: GridSummary,
    pub seed: Option<u64>,
}

impl EstimateReport {
    pub fn new(
        lemma: LemmaId,
        lhs: f64,
        rhs_terms: Vec<(&str, f64)>,
        params: serde_json::Value,
        grid: &Grid,
    ) -> Result<Self> {
        let rhs: f64 = rhs_terms.iter().map(|(_, v)| v).sum();
        let empirical_constant = estimate_ratio(lhs, rhs)?;
        Ok(Self {
            lemma: lemma.as_str().into(),
            lhs,
            rhs_terms: rhs_terms
                .into_iter()
                .map(|(n, v)| RhsTerm {
                    name: n.into(),
                    value: v,
                })
                .collect(),
            empirical_constant,
            params,
            grid: grid.into(),
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn rhs_total(&self) -> f64 {
        self.rhs_terms.iter().map(|t| t.value).sum()
    }

    pub fn rhs(&self, name: &str) -> Option<f64> {
        self.rhs_terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

/// Relative tolerance below which a right-hand side counts as zero.
const RHS_FLOOR: f64 = 1e-300;

pub(crate) fn estimate_ratio(lhs: f64, rhs: f64) -> Result<f64> {
    if !lhs.is_finite() || !rhs.is_finite() {
        return Err(Error::InvalidParams(format!(
            "non-finite estimate sides: lhs = {lhs}, rhs = {rhs}"
        )));
    }
    if rhs.abs() <= RHS_FLOOR {
        if lhs == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::DegenerateEstimate { lhs })
        }
    } else {
        Ok(lhs / rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_over_zero_is_zero() {
        assert_eq!(estimate_ratio(0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            estimate_ratio(1.0, 0.0),
            Err(Error::DegenerateEstimate { .. })
        ));
        assert_eq!(estimate_ratio(3.0, 2.0).unwrap(), 1.5);
    }

    #[test]
    fn lemma_ids_parse() {
        assert_eq!("3.4".parse::<LemmaId>().unwrap(), LemmaId::Commutator);
        let err = "9.9".parse::<LemmaId>().unwrap_err().to_string();
        assert!(err.contains("2.1, 2.3"), "{err}");
    }

    #[test]
    fn ratio_field_name() {
        let g = Grid::square(8).unwrap();
        let r = EstimateReport::new(LemmaId::Moser, 1.0, vec![("a", 2.0)], serde_json::json!({}), &g)
            .unwrap()
            .with_seed(3);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["ratio"], 0.5);
        assert_eq!(v["seed"], 3);
        assert_eq!(v["rhs_terms"][0]["name"], "a");
    }
}
