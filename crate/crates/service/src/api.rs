//! Request and response bodies, shared with the CLI's `--json` output so both
//! report the same numbers.

use intervene_core::{
    interventional_query, BoundResult, Direction, Distribution, DoAssignment, Evidence,
    InterventionSpace, Network, Result, RiskTable, TargetRef,
};
use serde::{Deserialize, Serialize};

use crate::manifest::Manifest;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub id: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSchema {
    pub name: String,
    pub states: Vec<String>,
    pub parents: Vec<String>,
    pub roles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSchema {
    pub id: String,
    pub name: String,
    /// Declaration order.
    pub variables: Vec<VariableSchema>,
    pub risk_table: RiskTable,
    pub default_target: Option<TargetRef>,
    pub default_space: Option<InterventionSpace>,
}

impl ModelSchema {
    pub fn build(id: &str, net: &Network, manifest: &Manifest) -> Self {
        Self {
            id: id.to_string(),
            name: net.name().to_string(),
            variables: net
                .variables()
                .iter()
                .map(|v| VariableSchema {
                    name: v.name.clone(),
                    states: v.states.clone(),
                    parents: v.parents.clone(),
                    roles: manifest.roles.get(&v.name).cloned().unwrap_or_default(),
                })
                .collect(),
            risk_table: manifest.risk_table(),
            default_target: manifest.default_target.clone(),
            default_space: manifest.default_space.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    #[serde(default)]
    pub evidence: Evidence,
    #[serde(default, rename = "do")]
    pub intervention: DoAssignment,
    pub target: TargetRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryResponse {
    pub target: TargetRef,
    pub distribution: Distribution,
    /// P(target.variable = target.state | evidence, do).
    pub probability: f64,
    pub risk_group: String,
}

pub fn run_query(net: &Network, table: &RiskTable, req: &QueryRequest) -> Result<QueryResponse> {
    net.resolve(&req.target.variable, &req.target.state)?;
    let distribution =
        interventional_query(net, &req.target.variable, &req.evidence, &req.intervention)?;
    let probability = distribution
        .probability(&req.target.state)
        .expect("target state resolved");
    Ok(QueryResponse {
        target: req.target.clone(),
        risk_group: table.group(probability).to_string(),
        distribution,
        probability,
    })
}

fn default_direction() -> Direction {
    Direction::Max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundRequest {
    /// Falls back to the manifest's default space.
    #[serde(default)]
    pub space: Option<InterventionSpace>,
    /// Falls back to the manifest's default target.
    #[serde(default)]
    pub target: Option<TargetRef>,
    #[serde(default)]
    pub evidence: Evidence,
    #[serde(default = "default_direction")]
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResponse {
    pub target: TargetRef,
    pub direction: Direction,
    pub value: f64,
    pub witness: DoAssignment,
    /// Witness as `A=a, B=b` in declaration order; empty for abstention.
    pub witness_text: String,
    pub explored: u64,
    /// `0.900000 witness: X=x1`.
    pub rendered: String,
}

pub fn bound_response(net: &Network, target: &TargetRef, r: BoundResult) -> BoundResponse {
    let witness_text = r.witness.describe(net);
    BoundResponse {
        target: target.clone(),
        direction: r.direction,
        value: r.value,
        rendered: render_bound(r.value, &witness_text),
        witness: r.witness,
        witness_text,
        explored: r.explored,
    }
}

pub fn render_bound(value: f64, witness_text: &str) -> String {
    if witness_text.is_empty() {
        format!("{value:.6} witness: none")
    } else {
        format!("{value:.6} witness: {witness_text}")
    }
}
