use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Network;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub variable: String,
    pub positive_state: String,
}

/// Posterior-threshold classifier: positive iff
/// P(target = positive_state | features) >= threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    /// Identifier or path of the network the classifier reads.
    pub model: String,
    pub target: TargetSpec,
    pub features: Vec<String>,
    pub threshold: f64,
}

/// A config with every name resolved against a network.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Resolved {
    pub target: usize,
    pub positive: usize,
    pub features: Vec<usize>,
    pub threshold: f64,
}

impl ClassifierConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub(crate) fn resolve(&self, net: &Network) -> Result<Resolved> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        let (target, positive) = net.resolve(&self.target.variable, &self.target.positive_state)?;
        let mut seen = HashSet::new();
        let mut features = Vec::with_capacity(self.features.len());
        for name in &self.features {
            let v = net.index_of(name)?;
            if v == target {
                return Err(Error::InvalidConfig(format!(
                    "target `{name}` cannot be a feature"
                )));
            }
            if !seen.insert(v) {
                return Err(Error::InvalidConfig(format!(
                    "feature `{name}` listed twice"
                )));
            }
            features.push(v);
        }
        Ok(Resolved {
            target,
            positive,
            features,
            threshold: self.threshold,
        })
    }
}
