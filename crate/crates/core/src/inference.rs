//! Exact inference by variable elimination, plus the joint-enumeration oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::limits::Limits;
use crate::model::{Assignment, Evidence, Network};

/// Distribution over one variable's states, aligned with its state list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub variable: String,
    pub states: Vec<String>,
    pub probs: Vec<f64>,
}

impl Distribution {
    pub fn probability(&self, state: &str) -> Option<f64> {
        self.states
            .iter()
            .position(|s| s == state)
            .map(|i| self.probs[i])
    }
}

/// Per-variable forced states; `None` leaves the variable's mechanism intact.
pub(crate) type Clamps = [Option<usize>];

/// Factor for `var`'s mechanism, or a point mass when clamped.
fn mechanism(net: &Network, clamps: &Clamps, var: usize) -> Factor {
    if let Some(state) = clamps.get(var).copied().flatten() {
        return Factor::indicator(var, net.cardinality(var), state);
    }
    let mut vars = net.parent_indices(var).to_vec();
    vars.push(var);
    Factor {
        cards: vars.iter().map(|&v| net.cardinality(v)).collect(),
        vars,
        values: net.cpt(var).values().to_vec(),
    }
}

fn parents_of<'a>(net: &'a Network, clamps: &Clamps, var: usize) -> &'a [usize] {
    if clamps.get(var).copied().flatten().is_some() {
        &[]
    } else {
        net.parent_indices(var)
    }
}

/// Ancestral closure of `seeds` in the (mutilated) graph. Everything outside it
/// is barren and sums to one.
fn relevant(net: &Network, clamps: &Clamps, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
    let mut keep = vec![false; net.len()];
    let mut stack: Vec<usize> = seeds.into_iter().collect();
    while let Some(v) = stack.pop() {
        if !keep[v] {
            keep[v] = true;
            stack.extend_from_slice(parents_of(net, clamps, v));
        }
    }
    keep
}

/// Greedy min-fill order over `vars`, ties broken by lower index.
fn min_fill_order(factors: &[Factor], mut vars: Vec<usize>, n: usize) -> Vec<usize> {
    let mut adj = vec![std::collections::BTreeSet::new(); n];
    for f in factors {
        for &a in &f.vars {
            for &b in &f.vars {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    let mut order = Vec::with_capacity(vars.len());
    vars.sort_unstable();
    while !vars.is_empty() {
        let (pos, _) = vars
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let nbrs: Vec<usize> = adj[v].iter().copied().collect();
                let mut fill = 0usize;
                for (k, &a) in nbrs.iter().enumerate() {
                    for &b in &nbrs[k + 1..] {
                        if !adj[a].contains(&b) {
                            fill += 1;
                        }
                    }
                }
                (i, (fill, v))
            })
            .min_by_key(|&(_, key)| key)
            .unwrap();
        let v = vars.remove(pos);
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for &a in &nbrs {
            adj[a].remove(&v);
            for &b in &nbrs {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        adj[v].clear();
        order.push(v);
    }
    order
}

pub(crate) struct Elimination<'a> {
    pub net: &'a Network,
    pub clamps: &'a Clamps,
    pub evidence: &'a [(usize, usize)],
    /// Explicit elimination order; variables it omits are eliminated
    /// afterwards in min-fill order.
    pub order: Option<&'a [usize]>,
}

impl Elimination<'_> {
    /// Unnormalized factor over `keep` (in that order) proportional to
    /// P(keep, evidence). With `rescale` every intermediate factor is divided
    /// by its maximum, which preserves ratios but not the absolute scale.
    pub fn run(&self, keep: &[usize], rescale: bool) -> Result<Factor> {
        let net = self.net;
        let seeds = keep
            .iter()
            .copied()
            .chain(self.evidence.iter().map(|&(v, _)| v));
        let live = relevant(net, self.clamps, seeds);

        let mut factors: Vec<Factor> = Vec::new();
        for v in (0..net.len()).filter(|&v| live[v]) {
            let mut f = mechanism(net, self.clamps, v);
            for &(ev, es) in self.evidence {
                f = f.restrict(ev, es);
            }
            factors.push(f);
        }

        let mut eliminate: Vec<usize> = (0..net.len())
            .filter(|&v| {
                live[v] && !keep.contains(&v) && !self.evidence.iter().any(|&(e, _)| e == v)
            })
            .collect();
        let order = match self.order {
            Some(given) => {
                let mut order: Vec<usize> = given
                    .iter()
                    .copied()
                    .filter(|v| eliminate.contains(v))
                    .collect();
                eliminate.retain(|v| !order.contains(v));
                order.extend(min_fill_order(&factors, eliminate, net.len()));
                order
            }
            None => min_fill_order(&factors, eliminate, net.len()),
        };

        for v in order {
            let (touching, rest): (Vec<Factor>, Vec<Factor>) =
                factors.into_iter().partition(|f| f.position(v).is_some());
            factors = rest;
            let mut prod = Factor::scalar(1.0);
            for f in &touching {
                prod = prod.product(f)?;
            }
            let mut summed = prod.sum_out(v);
            if rescale {
                let m = summed.max_value();
                if m > 0.0 {
                    summed.scale(1.0 / m);
                }
            }
            factors.push(summed);
        }

        let mut result = Factor::scalar(1.0);
        for f in &factors {
            result = result.product(f)?;
            if rescale {
                let m = result.max_value();
                if m > 0.0 {
                    result.scale(1.0 / m);
                }
            }
        }
        Ok(result.permuted(keep))
    }

    /// Normalized distribution over a single variable, retrying with
    /// rescaled factors if the plain pass underflows.
    pub fn posterior(&self, target: usize) -> Result<Vec<f64>> {
        if let Some(&(_, state)) = self.evidence.iter().find(|&&(v, _)| v == target) {
            if self.run(&[], false)?.total() <= 0.0 && self.run(&[], true)?.total() <= 0.0 {
                return Err(Error::InconsistentEvidence);
            }
            let mut probs = vec![0.0; self.net.cardinality(target)];
            probs[state] = 1.0;
            return Ok(probs);
        }
        let mut f = self.run(&[target], false)?;
        let mut z = f.total();
        if !(z >= f64::MIN_POSITIVE) || !z.is_finite() {
            f = self.run(&[target], true)?;
            z = f.total();
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::InconsistentEvidence);
        }
        Ok(f.values.iter().map(|x| x / z).collect())
    }
}

fn distribution(net: &Network, target: usize, probs: Vec<f64>) -> Distribution {
    let var = net.variable(target);
    Distribution {
        variable: var.name.clone(),
        states: var.states.clone(),
        probs,
    }
}

/// Exact P(target | evidence).
pub fn query_posterior(net: &Network, target: &str, evidence: &Evidence) -> Result<Distribution> {
    let t = net.index_of(target)?;
    let ev = evidence.resolve(net)?;
    let clamps = vec![None; net.len()];
    let probs = Elimination {
        net,
        clamps: &clamps,
        evidence: &ev,
        order: None,
    }
    .posterior(t)?;
    Ok(distribution(net, t, probs))
}

/// Like [`query_posterior`], eliminating variables in the given order first.
pub fn query_posterior_with_order(
    net: &Network,
    target: &str,
    evidence: &Evidence,
    order: &[&str],
) -> Result<Distribution> {
    let t = net.index_of(target)?;
    let ev = evidence.resolve(net)?;
    let order = order
        .iter()
        .map(|name| net.index_of(name))
        .collect::<Result<Vec<_>>>()?;
    let clamps = vec![None; net.len()];
    let probs = Elimination {
        net,
        clamps: &clamps,
        evidence: &ev,
        order: Some(&order),
    }
    .posterior(t)?;
    Ok(distribution(net, t, probs))
}

/// P(evidence); zero for contradictory evidence.
pub fn evidence_probability(net: &Network, evidence: &Evidence) -> Result<f64> {
    let ev = evidence.resolve(net)?;
    let clamps = vec![None; net.len()];
    let f = Elimination {
        net,
        clamps: &clamps,
        evidence: &ev,
        order: None,
    }
    .run(&[], false)?;
    Ok(f.total())
}

/// Product over variables of the CPT entry the assignment selects.
pub fn joint_probability(net: &Network, assignment: &Assignment) -> f64 {
    let states = assignment.states();
    (0..net.len())
        .map(|v| net.cpt(v).row(net.row_index(v, states))[states[v]])
        .product()
}

/// Every full assignment with its probability, in mixed-radix order
/// (first declared variable most significant).
#[derive(Debug, Clone)]
pub struct JointTable {
    pub rows: Vec<(Assignment, f64)>,
}

impl JointTable {
    pub fn total(&self) -> f64 {
        self.rows.iter().map(|(_, p)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Number of full assignments of `net`.
pub fn joint_size(net: &Network) -> u128 {
    (0..net.len()).map(|v| net.cardinality(v) as u128).product()
}

pub fn enumerate_joint(net: &Network) -> Result<JointTable> {
    enumerate_joint_with(net, &Limits::default())
}

pub fn enumerate_joint_with(net: &Network, limits: &Limits) -> Result<JointTable> {
    let size = joint_size(net);
    if size > limits.joint_cap {
        return Err(Error::CapExceeded {
            what: "joint distribution",
            size,
            cap: limits.joint_cap,
        });
    }
    let n = net.len();
    let mut rows = Vec::with_capacity(size as usize);
    let mut states = vec![0usize; n];
    for _ in 0..size {
        let a = Assignment::from_indices(net, states.clone())?;
        let p = joint_probability(net, &a);
        rows.push((a, p));
        for v in (0..n).rev() {
            states[v] += 1;
            if states[v] < net.cardinality(v) {
                break;
            }
            states[v] = 0;
        }
    }
    Ok(JointTable { rows })
}
