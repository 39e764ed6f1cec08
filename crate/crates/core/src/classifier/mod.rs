//! Posterior-threshold classifiers, their ordered decision diagrams, risk
//! groups, and misclassification bounds under interventions.

mod config;
mod error_bound;
mod odd;
mod risk;

pub use config::{ClassifierConfig, TargetSpec};
pub use error_bound::{
    error_bound, error_bound_with, misclassification, ErrorBound, ErrorKind, Misclassification,
};
pub use odd::{compile_odd, compile_odd_with, NodeRef, Odd, OddNode, OddOptions, VariableOrder};
pub use risk::{risk_group, RiskBand, RiskTable};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::Elimination;
use crate::model::{FeatureAssignment, Network};
use config::Resolved;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    pub posterior: f64,
    pub group: String,
}

/// Posterior of the positive state given one feature instantiation
/// (`states` aligned with `cfg.features`).
fn positive_posterior(net: &Network, cfg: &Resolved, states: &[usize]) -> Result<f64> {
    let mut evidence: Vec<(usize, usize)> = cfg
        .features
        .iter()
        .copied()
        .zip(states.iter().copied())
        .collect();
    evidence.sort_unstable();
    let clamps = vec![None; net.len()];
    let probs = Elimination {
        net,
        clamps: &clamps,
        evidence: &evidence,
        order: None,
    }
    .posterior(cfg.target)?;
    Ok(probs[cfg.positive])
}

fn threshold_label(posterior: f64, threshold: f64) -> Label {
    if posterior >= threshold {
        Label::Positive
    } else {
        Label::Negative
    }
}

/// Decision for one instantiation. Instantiations of probability zero have
/// no posterior; they are labelled as if the posterior were 0.
pub(crate) fn decide(net: &Network, cfg: &Resolved, states: &[usize]) -> Result<Label> {
    match positive_posterior(net, cfg, states) {
        Ok(p) => Ok(threshold_label(p, cfg.threshold)),
        Err(Error::InconsistentEvidence) => Ok(threshold_label(0.0, cfg.threshold)),
        Err(e) => Err(e),
    }
}

/// Feature states aligned with the config's feature list.
pub(crate) fn feature_states(
    net: &Network,
    cfg: &ClassifierConfig,
    f: &FeatureAssignment,
) -> Result<Vec<usize>> {
    if let Some((extra, _)) = f.iter().find(|(v, _)| !cfg.features.iter().any(|x| x == v)) {
        return Err(Error::InvalidConfig(format!(
            "`{extra}` is not a classifier feature"
        )));
    }
    cfg.features
        .iter()
        .map(|name| {
            let state = f
                .get(name)
                .ok_or_else(|| Error::PartialAssignment(name.clone()))?;
            net.resolve(name, state).map(|(_, s)| s)
        })
        .collect()
}

/// Classifies one fully specified feature instantiation.
pub fn classify(
    net: &Network,
    cfg: &ClassifierConfig,
    f: &FeatureAssignment,
    table: &RiskTable,
) -> Result<Classification> {
    let resolved = cfg.resolve(net)?;
    let states = feature_states(net, cfg, f)?;
    let posterior = positive_posterior(net, &resolved, &states)?;
    Ok(Classification {
        label: threshold_label(posterior, resolved.threshold),
        posterior,
        group: table.group(posterior).to_string(),
    })
}
