use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::doc::NetworkDoc;
use crate::error::{Error, Result};

/// Allowed deviation of a CPT row sum from 1. Rows are never renormalized.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    EmptyName,
    DuplicateName,
    TooFewStates,
    DuplicateState,
    UnknownParent,
    SelfParent,
    DuplicateParent,
    CptShape,
    ProbabilityRange,
    RowSum,
    Cycle,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::EmptyName => "empty-name",
            Rule::DuplicateName => "duplicate-name",
            Rule::TooFewStates => "too-few-states",
            Rule::DuplicateState => "duplicate-state",
            Rule::UnknownParent => "unknown-parent",
            Rule::SelfParent => "self-parent",
            Rule::DuplicateParent => "duplicate-parent",
            Rule::CptShape => "cpt-shape",
            Rule::ProbabilityRange => "probability-range",
            Rule::RowSum => "row-sum",
            Rule::Cycle => "cycle",
        }
    }
}

/// One broken rule: which variable, which rule, and the offending value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub variable: String,
    pub rule: Rule,
    pub detail: String,
}

impl Violation {
    fn new(variable: &str, rule: Rule, detail: impl Into<String>) -> Self {
        Self {
            variable: variable.to_string(),
            rule,
            detail: detail.into(),
        }
    }

    pub(crate) fn cycle(members: Vec<&str>) -> Self {
        Self::new(
            members.first().copied().unwrap_or_default(),
            Rule::Cycle,
            format!("cycle through {}", members.join(" -> ")),
        )
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}",
            self.variable,
            self.rule.code(),
            self.detail
        )
    }
}

/// Checks every structural rule; an empty result means the document describes
/// a valid network.
pub fn validate_network(doc: &NetworkDoc) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();

    for (i, v) in doc.variables.iter().enumerate() {
        if v.name.is_empty() {
            out.push(Violation::new(
                "",
                Rule::EmptyName,
                format!("variable #{i} has an empty name"),
            ));
        }
        if index.insert(v.name.as_str(), i).is_some() {
            out.push(Violation::new(
                &v.name,
                Rule::DuplicateName,
                format!("`{}` declared twice", v.name),
            ));
            // keep the first declaration for reference resolution
            let first = doc.variables.iter().position(|w| w.name == v.name).unwrap();
            index.insert(v.name.as_str(), first);
        }
        if v.states.len() < 2 {
            out.push(Violation::new(
                &v.name,
                Rule::TooFewStates,
                format!("{} state(s), at least 2 required", v.states.len()),
            ));
        }
        let mut seen = HashSet::new();
        for s in &v.states {
            if !seen.insert(s.as_str()) {
                out.push(Violation::new(
                    &v.name,
                    Rule::DuplicateState,
                    format!("state `{s}` repeated"),
                ));
            }
        }
    }

    let mut resolvable = vec![true; doc.variables.len()];
    for (i, v) in doc.variables.iter().enumerate() {
        let mut seen = HashSet::new();
        for p in &v.parents {
            if *p == v.name {
                out.push(Violation::new(
                    &v.name,
                    Rule::SelfParent,
                    format!("lists itself (`{p}`) as parent"),
                ));
                resolvable[i] = false;
            } else if !index.contains_key(p.as_str()) {
                out.push(Violation::new(
                    &v.name,
                    Rule::UnknownParent,
                    format!("parent `{p}` is not declared"),
                ));
                resolvable[i] = false;
            }
            if !seen.insert(p.as_str()) {
                out.push(Violation::new(
                    &v.name,
                    Rule::DuplicateParent,
                    format!("parent `{p}` listed twice"),
                ));
            }
        }
    }

    for (i, v) in doc.variables.iter().enumerate() {
        let columns = v.states.len();
        if resolvable[i] {
            let expected = v
                .parents
                .iter()
                .map(|p| doc.variables[index[p.as_str()]].states.len() as u128)
                .product::<u128>();
            if v.cpt.len() as u128 != expected {
                out.push(Violation::new(
                    &v.name,
                    Rule::CptShape,
                    format!("{} rows, expected {expected}", v.cpt.len()),
                ));
            }
        }
        for (r, row) in v.cpt.iter().enumerate() {
            if row.len() != columns {
                out.push(Violation::new(
                    &v.name,
                    Rule::CptShape,
                    format!("row {r} has {} entries, expected {columns}", row.len()),
                ));
                continue;
            }
            let mut in_range = true;
            for (c, &p) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&p) {
                    in_range = false;
                    out.push(Violation::new(
                        &v.name,
                        Rule::ProbabilityRange,
                        format!("row {r} column {c} is {p}"),
                    ));
                }
            }
            let sum: f64 = row.iter().sum();
            if in_range && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                out.push(Violation::new(
                    &v.name,
                    Rule::RowSum,
                    format!("row {r} sums to {sum}"),
                ));
            }
        }
    }

    if out.iter().all(|v| {
        !matches!(
            v.rule,
            Rule::UnknownParent | Rule::SelfParent | Rule::DuplicateName
        )
    }) {
        let parents: Vec<Vec<usize>> = doc
            .variables
            .iter()
            .map(|v| v.parents.iter().map(|p| index[p.as_str()]).collect())
            .collect();
        if let Err(cycle) = order_indices(&parents) {
            out.push(Violation::cycle(
                cycle
                    .iter()
                    .map(|&i| doc.variables[i].name.as_str())
                    .collect(),
            ));
        }
    }
    out
}

/// Kahn's algorithm, always releasing the lowest-indexed ready variable.
/// On failure returns the variables left on a cycle, in walk order.
pub(crate) fn order_indices(parents: &[Vec<usize>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| pending[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            pending[c] -= 1;
            if pending[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // walk parent links among the leftovers until a variable repeats
    let mut placed = vec![false; n];
    for &v in &order {
        placed[v] = true;
    }
    let start = (0..n).find(|&i| !placed[i]).unwrap();
    let mut path = vec![start];
    let mut cur = start;
    loop {
        let next = parents[cur].iter().copied().find(|&p| !placed[p]).unwrap();
        if let Some(pos) = path.iter().position(|&x| x == next) {
            let mut cycle = path[pos..].to_vec();
            cycle.reverse();
            return Err(cycle);
        }
        path.push(next);
        cur = next;
    }
}

/// Names in topological order, ties broken by declaration order.
pub fn topological_order(doc: &NetworkDoc) -> Result<Vec<String>> {
    let index: HashMap<&str, usize> = doc
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.name.as_str(), i))
        .collect();
    let parents = doc
        .variables
        .iter()
        .map(|v| {
            v.parents
                .iter()
                .map(|p| {
                    index
                        .get(p.as_str())
                        .copied()
                        .ok_or_else(|| Error::UnknownVariable(p.clone()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    match order_indices(&parents) {
        Ok(order) => Ok(order
            .into_iter()
            .map(|i| doc.variables[i].name.clone())
            .collect()),
        Err(cycle) => Err(Error::Invalid(Violation::cycle(
            cycle
                .iter()
                .map(|&i| doc.variables[i].name.as_str())
                .collect(),
        ))),
    }
}
