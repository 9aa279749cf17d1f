//! JSON model files.
//!
//! ```json
//! {
//!   "claim": {"family": "poisson", "lambda": 1.0},
//!   "interarrival": {"family": "poisson", "lambda": 1.01},
//!   "truncate_m": 10
//! }
//! ```
//!
//! Each distribution is a named family (`poisson`, `geometric`, `binomial`)
//! or an explicit `{"pmf": {"offset": 0, "weights": [...]}}`. An interarrival
//! law with infinite support must come with `truncate_m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, ParametricDist, Pmf, RiskModel, DEFAULT_TAIL_EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfJson {
    #[serde(default)]
    pub offset: i64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilyJson {
    Poisson { lambda: f64 },
    Geometric { p: f64 },
    Binomial { n: u32, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistJson {
    Pmf { pmf: PmfJson },
    Family(FamilyJson),
}

impl DistJson {
    pub fn to_dist(&self) -> Result<ParametricDist> {
        let dist = match self {
            DistJson::Pmf { pmf } => {
                ParametricDist::Explicit(Pmf::new(pmf.offset, pmf.weights.clone(), 0.0)?)
            }
            DistJson::Family(FamilyJson::Poisson { lambda }) => {
                ParametricDist::Poisson { lambda: *lambda }
            }
            DistJson::Family(FamilyJson::Geometric { p }) => ParametricDist::Geometric { p: *p },
            DistJson::Family(FamilyJson::Binomial { n, p }) => {
                ParametricDist::Binomial { n: *n, p: *p }
            }
        };
        dist.validate()?;
        Ok(dist)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub claim: DistJson,
    pub interarrival: DistJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncate_m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rebalance_l: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_eps: Option<f64>,
}

/// A built model together with the laws it came from.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: RiskModel,
    pub claim: ParametricDist,
    pub interarrival: ParametricDist,
    pub truncate_m: Option<i64>,
}

impl LoadedModel {
    /// `P(X - c*theta <= -m - 1)` under the untruncated interarrival law,
    /// when the file asked for truncation.
    pub fn original_tail(&self) -> Option<f64> {
        let m = self.truncate_m?;
        let claim = self.model.claim();
        Some(crate::survival::original_step_tail(claim, &self.interarrival, m))
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))
    }

    pub fn read(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::MalformedModel(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn build(&self) -> Result<LoadedModel> {
        let tail_eps = self.tail_eps.unwrap_or(DEFAULT_TAIL_EPS);
        let claim = self.claim.to_dist()?;
        let interarrival = self.interarrival.to_dist()?;
        let (claim_pmf, ia_pmf) = match (self.truncate_m, self.rebalance_l) {
            (None, Some(_)) => {
                return Err(Error::ParameterDomain("rebalance_l requires truncate_m".into()))
            }
            (None, None) => {
                if interarrival.support_max().is_none() {
                    return Err(Error::ModelDegenerate(
                        "interarrival has infinite support; set truncate_m".into(),
                    ));
                }
                (model::materialize(&claim, tail_eps)?, model::materialize(&interarrival, tail_eps)?)
            }
            (Some(m), None) => {
                (model::materialize(&claim, tail_eps)?, model::truncate(&interarrival, m)?)
            }
            (Some(m), Some(l)) => (
                model::rebalance_claim(&claim, &interarrival, m, l, tail_eps)?,
                model::truncate(&interarrival, m)?,
            ),
        };
        let model = RiskModel::new(claim_pmf, ia_pmf)?;
        Ok(LoadedModel { model, claim, interarrival, truncate_m: self.truncate_m })
    }
}
