//! JSON description of an IFS:
//!
//! ```json
//! {"domain": {"dim": 1, "lower": [0.0], "upper": [1.0]},
//!  "metric": "euclidean",
//!  "maps": [{"type": "power", "p": 0.5},
//!           {"type": "affine", "A": [[0.5]], "b": [0.0]}]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{Ifs, MapSpec};
use crate::space::{BaseMetric, BoxDomain, MetricSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDocument {
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsDocument {
    pub domain: DomainDocument,
    pub metric: BaseMetric,
    pub maps: Vec<MapSpec>,
}

impl IfsDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Builds and validates the system.
    pub fn to_ifs(&self) -> Result<Ifs> {
        let d = &self.domain;
        if d.lower.len() != d.dim || d.upper.len() != d.dim {
            return Err(Error::Dimension {
                expected: d.dim,
                found: if d.lower.len() != d.dim {
                    d.lower.len()
                } else {
                    d.upper.len()
                },
            });
        }
        let domain = BoxDomain::new(d.lower.clone(), d.upper.clone())?;
        Ifs::new(MetricSpace::new(domain, self.metric), self.maps.clone())
    }

    pub fn from_ifs(ifs: &Ifs) -> Self {
        let domain = ifs.domain();
        IfsDocument {
            domain: DomainDocument {
                dim: domain.dim(),
                lower: domain.lower().coords().to_vec(),
                upper: domain.upper().coords().to_vec(),
            },
            metric: ifs.space().base(),
            maps: ifs.maps().to_vec(),
        }
    }

    /// Pretty-printed JSON with fixed key order; reloading and re-emitting
    /// reproduces the same bytes.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}
