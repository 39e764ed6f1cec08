use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Network;

fn default_may_abstain() -> bool {
    true
}

/// One controllable variable and the values a policy may force it to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionEntry {
    pub variable: String,
    pub values: Vec<String>,
    /// Whether leaving the variable uncontrolled is also a policy option.
    #[serde(default = "default_may_abstain")]
    pub may_abstain: bool,
}

/// The set of variables a policy may set and the allowed values for each.
/// Its policies are the Cartesian product of per-variable options.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionSpace {
    pub interventions: Vec<InterventionEntry>,
}

impl InterventionSpace {
    pub fn new(interventions: Vec<InterventionEntry>) -> Self {
        Self { interventions }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space serialization")
    }

    pub fn is_empty(&self) -> bool {
        self.interventions.is_empty()
    }

    /// `(variable index, options)` sorted by declaration order. Options list
    /// abstention (`None`) first, then allowed states in state order.
    pub(crate) fn resolve(&self, net: &Network) -> Result<Vec<(usize, Vec<Option<usize>>)>> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(self.interventions.len());
        for entry in &self.interventions {
            let v = net.index_of(&entry.variable)?;
            if !seen.insert(v) {
                return Err(Error::InvalidSpace(format!(
                    "variable `{}` listed twice",
                    entry.variable
                )));
            }
            if entry.values.is_empty() {
                return Err(Error::InvalidSpace(format!(
                    "variable `{}` has no allowed values",
                    entry.variable
                )));
            }
            let mut states = entry
                .values
                .iter()
                .map(|s| net.resolve(&entry.variable, s).map(|(_, s)| s))
                .collect::<Result<Vec<_>>>()?;
            states.sort_unstable();
            if states.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidSpace(format!(
                    "variable `{}` repeats a value",
                    entry.variable
                )));
            }
            let mut options = Vec::with_capacity(states.len() + 1);
            if entry.may_abstain {
                options.push(None);
            }
            options.extend(states.into_iter().map(Some));
            out.push((v, options));
        }
        out.sort_by_key(|(v, _)| *v);
        Ok(out)
    }

    /// Number of policies, abstentions included.
    pub fn size(&self) -> u128 {
        self.interventions
            .iter()
            .map(|e| e.values.len() as u128 + u128::from(e.may_abstain))
            .product()
    }
}
