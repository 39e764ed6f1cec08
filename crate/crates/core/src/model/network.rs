use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::doc::{NetworkDoc, VariableDoc};
use super::validate::{order_indices, validate_network, Violation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
    pub parents: Vec<String>,
}

impl Variable {
    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Conditional probability table stored row-major: one row per parent
/// combination (last listed parent varying fastest), one column per state.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    columns: usize,
    values: Vec<f64>,
}

impl Cpt {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let columns = rows.first().map_or(0, Vec::len);
        Self {
            columns,
            values: rows.iter().flatten().copied().collect(),
        }
    }

    pub(crate) fn from_flat(columns: usize, values: Vec<f64>) -> Self {
        Self { columns, values }
    }

    pub fn row_count(&self) -> usize {
        if self.columns == 0 {
            0
        } else {
            self.values.len() / self.columns
        }
    }

    pub fn row(&self, index: usize) -> &[f64] {
        &self.values[index * self.columns..(index + 1) * self.columns]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.columns.max(1))
    }

    /// Flat row-major view: parents first, own state last.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }
}

/// A validated discrete Bayesian network.
#[derive(Debug, Clone)]
pub struct Network {
    name: String,
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    order: Vec<usize>,
    index: HashMap<String, usize>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.variables == other.variables && self.cpts == other.cpts
    }
}

impl Network {
    /// Builds a network from a document, rejecting it with the first violation
    /// found if any structural rule is broken.
    pub fn from_doc(doc: NetworkDoc) -> Result<Self> {
        if let Some(v) = validate_network(&doc).into_iter().next() {
            return Err(Error::Invalid(v));
        }
        Ok(Self::from_valid_doc(doc))
    }

    fn from_valid_doc(doc: NetworkDoc) -> Self {
        let mut variables = Vec::with_capacity(doc.variables.len());
        let mut cpts = Vec::with_capacity(doc.variables.len());
        for v in doc.variables {
            cpts.push(Cpt::from_rows(&v.cpt));
            variables.push(Variable {
                name: v.name,
                states: v.states,
                parents: v.parents,
            });
        }
        Self::assemble(doc.name, variables, cpts).expect("validated document")
    }

    pub(crate) fn assemble(name: String, variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Self> {
        let index: HashMap<String, usize> = variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), i))
            .collect();
        let parents: Vec<Vec<usize>> = variables
            .iter()
            .map(|v| v.parents.iter().map(|p| index[p]).collect())
            .collect();
        let mut children = vec![Vec::new(); variables.len()];
        for (child, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        let order = order_indices(&parents).map_err(|cycle| {
            Error::Invalid(Violation::cycle(
                cycle.iter().map(|&i| variables[i].name.as_str()).collect(),
            ))
        })?;
        Ok(Self {
            name,
            variables,
            cpts,
            parents,
            children,
            order,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, index: usize) -> &Variable {
        &self.variables[index]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, index: usize) -> &Cpt {
        &self.cpts[index]
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn cardinality(&self, index: usize) -> usize {
        self.variables[index].states.len()
    }

    pub fn parent_indices(&self, index: usize) -> &[usize] {
        &self.parents[index]
    }

    pub fn child_indices(&self, index: usize) -> &[usize] {
        &self.children[index]
    }

    /// Topological order as variable indices; declaration order breaks ties.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn topological_names(&self) -> Vec<&str> {
        self.order
            .iter()
            .map(|&i| self.variables[i].name.as_str())
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// `(variable index, state index)` for a named state.
    pub fn resolve(&self, variable: &str, state: &str) -> Result<(usize, usize)> {
        let v = self.index_of(variable)?;
        let s = self.variables[v]
            .state_index(state)
            .ok_or_else(|| Error::UnknownState {
                variable: variable.to_string(),
                state: state.to_string(),
            })?;
        Ok((v, s))
    }

    /// Row of `variable`'s CPT selected by the given full state vector.
    pub(crate) fn row_index(&self, variable: usize, states: &[usize]) -> usize {
        self.parents[variable]
            .iter()
            .fold(0, |acc, &p| acc * self.cardinality(p) + states[p])
    }

    /// Replaces the named variables' parents and CPTs, keeping everything else.
    pub(crate) fn with_replaced(
        &self,
        replacements: Vec<(usize, Vec<String>, Cpt)>,
    ) -> Result<Self> {
        let mut variables = self.variables.clone();
        let mut cpts = self.cpts.clone();
        for (v, parents, cpt) in replacements {
            variables[v].parents = parents;
            cpts[v] = cpt;
        }
        Self::assemble(self.name.clone(), variables, cpts)
    }

    pub fn to_doc(&self) -> NetworkDoc {
        NetworkDoc {
            name: self.name.clone(),
            variables: self
                .variables
                .iter()
                .zip(&self.cpts)
                .map(|(v, cpt)| VariableDoc {
                    name: v.name.clone(),
                    states: v.states.clone(),
                    parents: v.parents.clone(),
                    cpt: cpt.to_rows(),
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;

    fn try_from(doc: NetworkDoc) -> Result<Self> {
        Self::from_doc(doc)
    }
}
