use std::collections::BTreeMap;

use intervene_core::{InterventionSpace, Network, RiskTable, TargetRef};
use serde::{Deserialize, Serialize};

/// Sidecar `<id>.manifest.json` next to a model: role tags per variable, the
/// risk table, and defaults for the console.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// Variable name to role tags such as `target`, `feature`,
    /// `intervention`. Tags are free-form and echoed as given.
    #[serde(default)]
    pub roles: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub risk_table: Option<RiskTable>,
    #[serde(default)]
    pub default_target: Option<TargetRef>,
    #[serde(default)]
    pub default_space: Option<InterventionSpace>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Every name the manifest mentions exists in `net`.
    pub fn check(&self, net: &Network) -> Result<(), String> {
        for name in self.roles.keys() {
            net.index_of(name).map_err(|e| e.to_string())?;
        }
        if let Some(t) = &self.default_target {
            net.resolve(&t.variable, &t.state)
                .map_err(|e| e.to_string())?;
        }
        if let Some(space) = &self.default_space {
            for entry in &space.interventions {
                for state in &entry.values {
                    net.resolve(&entry.variable, state)
                        .map_err(|e| e.to_string())?;
                }
            }
        }
        Ok(())
    }

    pub fn risk_table(&self) -> RiskTable {
        self.risk_table.clone().unwrap_or_default()
    }
}
