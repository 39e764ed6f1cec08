//! Discrete Bayesian network data model.
//!
//! A [`Network`] is built from a [`NetworkDoc`] (the JSON document form) and is
//! immutable afterwards. Every `Network` in circulation satisfies the structural
//! rules checked by [`validate_network`]; documents that break them are
//! rejected with [`Error::Invalid`](crate::Error::Invalid).

mod doc;
mod network;
mod validate;

pub use doc::{format_probability, parse_network, serialize_network, NetworkDoc, VariableDoc};
pub use network::{Cpt, Network, Variable};
pub use validate::{topological_order, validate_network, Rule, Violation, ROW_SUM_TOLERANCE};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! state_map {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(BTreeMap<String, String>);

        impl $name {
            pub fn new() -> Self {
                Self::default()
            }

            /// Builds the map, rejecting a variable named twice.
            pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self>
            where
                I: IntoIterator<Item = (K, V)>,
                K: Into<String>,
                V: Into<String>,
            {
                let mut out = Self::new();
                for (k, v) in pairs {
                    out.insert(k, v)?;
                }
                Ok(out)
            }

            pub fn insert(&mut self, variable: impl Into<String>, state: impl Into<String>) -> Result<()> {
                let variable = variable.into();
                if self.0.contains_key(&variable) {
                    return Err(Error::DuplicateAssignment(variable));
                }
                self.0.insert(variable, state.into());
                Ok(())
            }

            pub fn get(&self, variable: &str) -> Option<&str> {
                self.0.get(variable).map(String::as_str)
            }

            pub fn contains(&self, variable: &str) -> bool {
                self.0.contains_key(variable)
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            /// Pairs in variable-name order.
            pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
                self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
            }

            /// Resolves names to `(variable index, state index)` pairs, sorted by
            /// variable index.
            pub fn resolve(&self, net: &Network) -> Result<Vec<(usize, usize)>> {
                let mut out = self
                    .iter()
                    .map(|(var, state)| net.resolve(var, state))
                    .collect::<Result<Vec<_>>>()?;
                out.sort_unstable();
                Ok(out)
            }

            /// `A=a, B=b` rendering in the network's declaration order.
            pub fn describe(&self, net: &Network) -> String {
                let mut pairs: Vec<_> = self
                    .iter()
                    .map(|(k, v)| (net.index_of(k).unwrap_or(usize::MAX), k, v))
                    .collect();
                pairs.sort();
                pairs
                    .iter()
                    .map(|(_, k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            }
        }

        impl FromIterator<(String, String)> for $name {
            /// Later pairs overwrite earlier ones; use [`Self::from_pairs`] to
            /// reject duplicates instead.
            fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
                Self(iter.into_iter().collect())
            }
        }
    };
}

state_map!(
    /// Observed states: a partial map from variable name to state label.
    Evidence
);

state_map!(
    /// Forced values for a do-intervention.
    DoAssignment
);

state_map!(
    /// A classifier input: one state per feature variable.
    FeatureAssignment
);

/// A full assignment of one state to every variable, stored as state indices
/// in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn from_indices(net: &Network, states: Vec<usize>) -> Result<Self> {
        if states.len() != net.len() {
            let missing = net
                .variables()
                .get(states.len())
                .map(|v| v.name.clone())
                .unwrap_or_default();
            return Err(Error::PartialAssignment(missing));
        }
        for (v, &s) in states.iter().enumerate() {
            if s >= net.cardinality(v) {
                return Err(Error::UnknownState {
                    variable: net.variables()[v].name.clone(),
                    state: s.to_string(),
                });
            }
        }
        Ok(Self(states))
    }

    /// Builds a total assignment from names; every variable must appear.
    pub fn from_names<'a, I>(net: &Network, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut states = vec![None; net.len()];
        for (var, state) in pairs {
            let (v, s) = net.resolve(var, state)?;
            if states[v].replace(s).is_some() {
                return Err(Error::DuplicateAssignment(var.to_string()));
            }
        }
        let states = states
            .into_iter()
            .enumerate()
            .map(|(v, s)| {
                s.ok_or_else(|| Error::PartialAssignment(net.variables()[v].name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(states))
    }

    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn state_of<'n>(&self, net: &'n Network, variable: &str) -> Result<&'n str> {
        let v = net.index_of(variable)?;
        Ok(&net.variables()[v].states[self.0[v]])
    }

    pub fn to_pairs(&self, net: &Network) -> Vec<(String, String)> {
        net.variables()
            .iter()
            .zip(&self.0)
            .map(|(var, &s)| (var.name.clone(), var.states[s].clone()))
            .collect()
    }
}
