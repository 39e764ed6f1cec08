//! What-if tables and single-variable sensitivity ranking.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::query_posterior;
use crate::model::{Evidence, Network};
use crate::par::{map_collect, Strategy};

/// Spread above which a candidate is suggested as a classifier feature.
pub const DEFAULT_FEATURE_CUTOFF: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRef {
    pub variable: String,
    pub state: String,
}

impl TargetRef {
    pub fn new(variable: impl Into<String>, state: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            state: state.into(),
        }
    }
}

impl std::fmt::Display for TargetRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}={}", self.variable, self.state)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRow {
    pub evidence: Evidence,
    /// One entry per requested target, in request order. Empty when the
    /// evidence is inconsistent.
    pub posteriors: Vec<(TargetRef, f64)>,
    pub inconsistent: bool,
}

/// How a table is rendered as text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rendering {
    /// Six decimals.
    #[default]
    Probability,
    /// Percentages with one decimal.
    Percent,
}

impl Rendering {
    pub fn format(self, p: f64) -> String {
        match self {
            Rendering::Probability => format!("{p:.6}"),
            Rendering::Percent => format!("{:.1}", p * 100.0),
        }
    }
}

/// One row per evidence set, in input order. Rows whose evidence has
/// probability zero are kept and marked inconsistent.
pub fn what_if_table(
    net: &Network,
    targets: &[TargetRef],
    evidence_sets: &[Evidence],
) -> Result<Vec<WhatIfRow>> {
    what_if_table_with(net, targets, evidence_sets, Strategy::default())
}

pub fn what_if_table_with(
    net: &Network,
    targets: &[TargetRef],
    evidence_sets: &[Evidence],
    strategy: Strategy,
) -> Result<Vec<WhatIfRow>> {
    for t in targets {
        net.resolve(&t.variable, &t.state)?;
    }
    for e in evidence_sets {
        e.resolve(net)?;
    }
    map_collect(strategy, evidence_sets.len(), |i| {
        let evidence = &evidence_sets[i];
        let mut posteriors = Vec::with_capacity(targets.len());
        for t in targets {
            match query_posterior(net, &t.variable, evidence) {
                Ok(d) => {
                    posteriors.push((t.clone(), d.probability(&t.state).expect("resolved state")))
                }
                Err(Error::InconsistentEvidence) => {
                    return Ok(WhatIfRow {
                        evidence: evidence.clone(),
                        posteriors: Vec::new(),
                        inconsistent: true,
                    })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(WhatIfRow {
            evidence: evidence.clone(),
            posteriors,
            inconsistent: false,
        })
    })
}

/// Tab-separated rendering: evidence variables, their states, then one
/// column per target. Evidence is listed in declaration order.
pub fn what_if_tsv(
    net: &Network,
    targets: &[TargetRef],
    rows: &[WhatIfRow],
    rendering: Rendering,
) -> String {
    let mut out = String::from("evidence\tmodalities");
    for t in targets {
        let _ = write!(out, "\t{t}");
    }
    out.push('\n');
    for row in rows {
        let mut pairs: Vec<(usize, &str, &str)> = row
            .evidence
            .iter()
            .map(|(k, v)| (net.index_of(k).unwrap_or(usize::MAX), k, v))
            .collect();
        pairs.sort();
        if pairs.is_empty() {
            out.push_str("No evidence\t");
        } else {
            let names: Vec<&str> = pairs.iter().map(|p| p.1).collect();
            let states: Vec<&str> = pairs.iter().map(|p| p.2).collect();
            let _ = write!(out, "{}\t{}", names.join(","), states.join(","));
        }
        if row.inconsistent {
            for _ in targets {
                out.push_str("\tinconsistent");
            }
        } else {
            for (_, p) in &row.posteriors {
                let _ = write!(out, "\t{}", rendering.format(*p));
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityEntry {
    pub variable: String,
    /// max - min of the target posterior over the candidate's states.
    pub spread: f64,
    /// Target posterior per candidate state; `None` where the state is
    /// impossible given the baseline.
    pub posteriors: Vec<(String, Option<f64>)>,
    /// States skipped as inconsistent with the baseline.
    pub skipped: Vec<String>,
}

/// Ranks candidates by how far conditioning on each of their states moves
/// P(target = target_state | baseline). Sorted by spread, descending; ties
/// keep declaration order.
pub fn sensitivity_rank(
    net: &Network,
    target: &str,
    target_state: &str,
    candidates: &[String],
    baseline: &Evidence,
) -> Result<Vec<SensitivityEntry>> {
    sensitivity_rank_with(
        net,
        target,
        target_state,
        candidates,
        baseline,
        Strategy::default(),
    )
}

pub fn sensitivity_rank_with(
    net: &Network,
    target: &str,
    target_state: &str,
    candidates: &[String],
    baseline: &Evidence,
    strategy: Strategy,
) -> Result<Vec<SensitivityEntry>> {
    net.resolve(target, target_state)?;
    baseline.resolve(net)?;
    let mut ordered: Vec<(usize, &String)> = Vec::with_capacity(candidates.len());
    for c in candidates {
        let v = net.index_of(c)?;
        if c == target {
            return Err(Error::InvalidConfig(format!(
                "candidate `{c}` is the target"
            )));
        }
        if baseline.contains(c) {
            return Err(Error::Overlap(c.clone()));
        }
        if ordered.iter().any(|&(w, _)| w == v) {
            return Err(Error::DuplicateAssignment(c.clone()));
        }
        ordered.push((v, c));
    }
    ordered.sort();

    let mut entries = map_collect(strategy, ordered.len(), |i| {
        let (v, name) = ordered[i];
        let mut posteriors = Vec::new();
        let mut skipped = Vec::new();
        for state in &net.variable(v).states {
            let mut evidence = baseline.clone();
            evidence.insert(name.clone(), state.clone())?;
            match query_posterior(net, target, &evidence) {
                Ok(d) => posteriors.push((state.clone(), d.probability(target_state))),
                Err(Error::InconsistentEvidence) => {
                    posteriors.push((state.clone(), None));
                    skipped.push(state.clone());
                }
                Err(e) => return Err(e),
            }
        }
        let values: Vec<f64> = posteriors.iter().filter_map(|(_, p)| *p).collect();
        let spread = match (
            values.iter().copied().reduce(f64::max),
            values.iter().copied().reduce(f64::min),
        ) {
            (Some(hi), Some(lo)) => hi - lo,
            _ => 0.0,
        };
        Ok(SensitivityEntry {
            variable: name.clone(),
            spread,
            posteriors,
            skipped,
        })
    })?;
    entries.sort_by(|a, b| b.spread.total_cmp(&a.spread));
    Ok(entries)
}

/// Candidates whose spread exceeds `cutoff`, in rank order.
pub fn suggest_features(entries: &[SensitivityEntry], cutoff: f64) -> Vec<&str> {
    entries
        .iter()
        .filter(|e| e.spread > cutoff)
        .map(|e| e.variable.as_str())
        .collect()
}

pub fn sensitivity_tsv(entries: &[SensitivityEntry], rendering: Rendering) -> String {
    let mut out = String::from("variable\tspread\tposteriors\n");
    for e in entries {
        let cells: Vec<String> = e
            .posteriors
            .iter()
            .map(|(s, p)| match p {
                Some(p) => format!("{s}={}", rendering.format(*p)),
                None => format!("{s}=skipped"),
            })
            .collect();
        let _ = writeln!(
            out,
            "{}\t{}\t{}",
            e.variable,
            rendering.format(e.spread),
            cells.join(",")
        );
    }
    out
}
