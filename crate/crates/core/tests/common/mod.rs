//! Random network generation and brute-force oracles shared by the
//! integration tests. The oracles only read CPT entries and enumerate full
//! assignments; they never touch the elimination code.

#![allow(dead_code)]

use intervene_core::model::{NetworkDoc, VariableDoc};
use intervene_core::{
    apply_do, enumerate_joint, joint_probability, parse_network, Assignment, DoAssignment,
    Evidence, Network,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub const DEMO_JSON: &str = include_str!("../../../../data/models/demo.json");

pub fn demo() -> Network {
    parse_network(DEMO_JSON).expect("bundled demo model parses")
}

/// Random row summing to 1; with `zeros` some entries may be exactly 0.
fn random_row(rng: &mut impl Rng, len: usize, zeros: bool) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..len)
            .map(|_| {
                if zeros && rng.gen_bool(0.15) {
                    0.0
                } else {
                    rng.gen_range(0.01..1.0)
                }
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            return raw.into_iter().map(|x| x / total).collect();
        }
    }
}

pub struct NetSpec {
    pub max_vars: usize,
    pub max_states: usize,
    pub max_parents: usize,
    pub zeros: bool,
}

impl Default for NetSpec {
    fn default() -> Self {
        Self {
            max_vars: 8,
            max_states: 3,
            max_parents: 3,
            zeros: true,
        }
    }
}

/// DAG over `V0..Vn` built in a random topological order, declared in a
/// shuffled order.
pub fn random_network(rng: &mut impl Rng, spec: &NetSpec) -> Network {
    let n = rng.gen_range(1..=spec.max_vars);
    let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=spec.max_states)).collect();
    let mut vars = Vec::with_capacity(n);
    for i in 0..n {
        let mut earlier: Vec<usize> = (0..i).collect();
        earlier.shuffle(rng);
        let k = rng.gen_range(0..=spec.max_parents.min(i));
        let parents: Vec<usize> = earlier.into_iter().take(k).collect();
        let rows: usize = parents.iter().map(|&p| cards[p]).product();
        vars.push(VariableDoc {
            name: format!("V{i}"),
            states: (0..cards[i]).map(|s| format!("s{s}")).collect(),
            parents: parents.iter().map(|p| format!("V{p}")).collect(),
            cpt: (0..rows)
                .map(|_| random_row(rng, cards[i], spec.zeros))
                .collect(),
        });
    }
    vars.shuffle(rng);
    Network::from_doc(NetworkDoc {
        name: "random".into(),
        variables: vars,
    })
    .expect("generated network is valid")
}

/// Random evidence on up to `max` variables outside `exclude`.
pub fn random_evidence(
    rng: &mut impl Rng,
    net: &Network,
    exclude: &[&str],
    max: usize,
) -> Evidence {
    let mut names: Vec<&str> = net
        .variables()
        .iter()
        .map(|v| v.name.as_str())
        .filter(|n| !exclude.contains(n))
        .collect();
    names.shuffle(rng);
    let k = rng.gen_range(0..=max.min(names.len()));
    names
        .into_iter()
        .take(k)
        .map(|name| {
            let states = &net.variable(net.index_of(name).unwrap()).states;
            (
                name.to_string(),
                states[rng.gen_range(0..states.len())].clone(),
            )
        })
        .collect()
}

fn consistent(net: &Network, a: &Assignment, evidence: &Evidence) -> bool {
    evidence
        .iter()
        .all(|(var, state)| a.state_of(net, var).unwrap() == state)
}

/// P(target | evidence) by summing the full joint; `None` if P(evidence) = 0.
pub fn oracle_posterior(net: &Network, target: &str, evidence: &Evidence) -> Option<Vec<f64>> {
    let t = net.index_of(target).unwrap();
    let mut mass = vec![0.0; net.cardinality(t)];
    for (a, p) in enumerate_joint(net).unwrap().rows {
        if consistent(net, &a, evidence) {
            mass[a.states()[t]] += p;
        }
    }
    let z: f64 = mass.iter().sum();
    (z > 0.0).then(|| mass.into_iter().map(|m| m / z).collect())
}

/// P(evidence) by summing the full joint.
pub fn oracle_evidence(net: &Network, evidence: &Evidence) -> f64 {
    enumerate_joint(net)
        .unwrap()
        .rows
        .iter()
        .filter(|(a, _)| consistent(net, a, evidence))
        .map(|(_, p)| p)
        .sum()
}

/// Interventional joint by clamping: product of the CPT entries of
/// non-intervened variables, zero where the assignment disagrees with `d`.
pub fn oracle_truncated(net: &Network, d: &DoAssignment, a: &Assignment) -> f64 {
    let states = a.states();
    let mut p = 1.0;
    for (v, var) in net.variables().iter().enumerate() {
        if let Some(forced) = d.get(&var.name) {
            if var.states[states[v]] != forced {
                return 0.0;
            }
            continue;
        }
        let row = var.parents.iter().fold(0, |acc, name| {
            let pi = net.index_of(name).unwrap();
            acc * net.cardinality(pi) + states[pi]
        });
        p *= net.cpt(v).row(row)[states[v]];
    }
    p
}

/// P(target | evidence, do(d)) from the truncated-factorization oracle.
pub fn oracle_interventional(
    net: &Network,
    target: &str,
    evidence: &Evidence,
    d: &DoAssignment,
) -> Option<Vec<f64>> {
    let t = net.index_of(target).unwrap();
    let mut mass = vec![0.0; net.cardinality(t)];
    for (a, _) in enumerate_joint(net).unwrap().rows {
        if consistent(net, &a, evidence) {
            mass[a.states()[t]] += oracle_truncated(net, d, &a);
        }
    }
    let z: f64 = mass.iter().sum();
    (z > 0.0).then(|| mass.into_iter().map(|m| m / z).collect())
}

/// Mutilated-network joint straight from the CPTs of `apply_do`.
pub fn mutilated_joint(net: &Network, d: &DoAssignment) -> Vec<f64> {
    let m = apply_do(net, d).unwrap();
    enumerate_joint(&m)
        .unwrap()
        .rows
        .iter()
        .map(|(a, _)| joint_probability(&m, a))
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn random_do(rng: &mut impl Rng, net: &Network, exclude: &[&str], max: usize) -> DoAssignment {
    let e = random_evidence(rng, net, exclude, max);
    e.iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
