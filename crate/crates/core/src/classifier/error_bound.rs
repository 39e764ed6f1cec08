use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::config::{ClassifierConfig, Resolved};
use super::odd::{compile_odd_with, Odd, OddOptions};
use super::Label;
use crate::causal::{
    clamps_for, search, BoundResult, Direction, InterventionSpace, SearchOptions, SearchPlan,
};
use crate::error::{Error, Result};
use crate::inference::Elimination;
use crate::model::{DoAssignment, Evidence, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    /// Target positive, classifier says negative.
    FalseNegative,
    /// Target not positive, classifier says positive.
    FalsePositive,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::FalseNegative => "false-negative",
            ErrorKind::FalsePositive => "false-positive",
        })
    }
}

impl FromStr for ErrorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "false-negative" | "fn" => Ok(ErrorKind::FalseNegative),
            "false-positive" | "fp" => Ok(ErrorKind::FalsePositive),
            other => Err(format!(
                "error kind must be `false-negative` or `false-positive`, got `{other}`"
            )),
        }
    }
}

/// Misclassification under one policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Misclassification {
    /// P(error event) under the interventional joint, e.g. for false
    /// negatives P(target positive, predicted negative).
    pub joint: f64,
    /// The same event conditioned on the true class (positive for false
    /// negatives, non-positive for false positives); `None` if that class has
    /// probability zero.
    pub conditional: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBound {
    pub kind: ErrorKind,
    /// Extremum of the joint error probability.
    pub bound: BoundResult,
    /// Conditional error rate under the witness policy.
    pub conditional_at_witness: Option<f64>,
}

/// The diagram's decision for every instantiation, in config feature order.
fn diagram_labels(net: &Network, cfg: &Resolved, odd: &Odd) -> Result<Vec<Label>> {
    let positions: Vec<usize> = odd
        .order()
        .iter()
        .map(|name| {
            let v = net.index_of(name)?;
            cfg.features.iter().position(|&f| f == v).ok_or_else(|| {
                Error::InvalidConfig(format!("diagram variable `{name}` is not a feature"))
            })
        })
        .collect::<Result<_>>()?;
    if positions.len() != cfg.features.len() {
        return Err(Error::InvalidConfig(
            "diagram order does not cover the features".into(),
        ));
    }
    let cards: Vec<usize> = cfg.features.iter().map(|&v| net.cardinality(v)).collect();
    let size: usize = cards.iter().product();
    let mut states = vec![0usize; cards.len()];
    let mut by_level = vec![0usize; cards.len()];
    let mut labels = Vec::with_capacity(size);
    for _ in 0..size {
        for (level, &pos) in positions.iter().enumerate() {
            by_level[level] = states[pos];
        }
        labels.push(odd.evaluate_states(&by_level));
        for i in (0..cards.len()).rev() {
            states[i] += 1;
            if states[i] < cards[i] {
                break;
            }
            states[i] = 0;
        }
    }
    Ok(labels)
}

fn measure(
    net: &Network,
    cfg: &Resolved,
    labels: &[Label],
    kind: ErrorKind,
    clamps: &[Option<usize>],
) -> Result<Misclassification> {
    let mut keep = vec![cfg.target];
    keep.extend_from_slice(&cfg.features);
    let joint = Elimination {
        net,
        clamps,
        evidence: &[],
        order: None,
    }
    .run(&keep, false)?;
    let block = labels.len();
    let (mut error, mut class_mass) = (0.0, 0.0);
    for (t, row) in joint.values.chunks(block).enumerate() {
        let truly_positive = t == cfg.positive;
        let in_class = match kind {
            ErrorKind::FalseNegative => truly_positive,
            ErrorKind::FalsePositive => !truly_positive,
        };
        if !in_class {
            continue;
        }
        let wrong = match kind {
            ErrorKind::FalseNegative => Label::Negative,
            ErrorKind::FalsePositive => Label::Positive,
        };
        for (&p, &label) in row.iter().zip(labels) {
            class_mass += p;
            if label == wrong {
                error += p;
            }
        }
    }
    Ok(Misclassification {
        joint: error,
        conditional: (class_mass > 0.0).then(|| error / class_mass),
    })
}

/// Error of a compiled classifier under a single policy `d`.
pub fn misclassification(
    net: &Network,
    cfg: &ClassifierConfig,
    odd: &Odd,
    kind: ErrorKind,
    d: &DoAssignment,
) -> Result<Misclassification> {
    let resolved = cfg.resolve(net)?;
    let labels = diagram_labels(net, &resolved, odd)?;
    measure(net, &resolved, &labels, kind, &clamps_for(net, d)?)
}

/// Compiles the classifier, then bounds its joint error probability over
/// every policy in `space`.
pub fn error_bound(
    net: &Network,
    cfg: &ClassifierConfig,
    kind: ErrorKind,
    space: &InterventionSpace,
    direction: Direction,
) -> Result<ErrorBound> {
    let odd = compile_odd_with(net, cfg, &OddOptions::default())?;
    error_bound_with(
        net,
        cfg,
        &odd,
        kind,
        space,
        direction,
        &SearchOptions::default(),
    )
}

pub fn error_bound_with(
    net: &Network,
    cfg: &ClassifierConfig,
    odd: &Odd,
    kind: ErrorKind,
    space: &InterventionSpace,
    direction: Direction,
    opts: &SearchOptions,
) -> Result<ErrorBound> {
    let resolved = cfg.resolve(net)?;
    let labels = diagram_labels(net, &resolved, odd)?;
    let plan = SearchPlan::new(net, space, &Evidence::new(), &opts.limits)?;
    let found = search(&plan, direction, opts, |clamps| {
        measure(net, &resolved, &labels, kind, clamps).map(|m| Some(m.joint))
    })?;
    let (index, value) = found.expect("every policy has a defined error");
    let conditional_at_witness =
        measure(net, &resolved, &labels, kind, &plan.clamps(index))?.conditional;
    Ok(ErrorBound {
        kind,
        bound: BoundResult {
            direction,
            value,
            witness: plan.witness(net, index),
            explored: plan.size() as u64,
        },
        conditional_at_witness,
    })
}
