//! Do-interventions by graph mutilation, and exact bounds on a target
//! probability over every policy in an intervention space.

mod bounds;
mod space;

pub use bounds::{
    bound_interventions, bound_interventions_with, check_bound_request, BoundResult, Direction,
    SearchControl, SearchOptions,
};
pub use space::{InterventionEntry, InterventionSpace};

pub(crate) use bounds::{search, SearchPlan};

use crate::error::{Error, Result};
use crate::inference::{Distribution, Elimination};
use crate::model::{Assignment, Cpt, DoAssignment, Evidence, Network};

/// Per-variable clamps for `d`, indexed by variable.
pub(crate) fn clamps_for(net: &Network, d: &DoAssignment) -> Result<Vec<Option<usize>>> {
    let mut clamps = vec![None; net.len()];
    for (v, s) in d.resolve(net)? {
        clamps[v] = Some(s);
    }
    Ok(clamps)
}

/// Mutilated network: every intervened variable loses its parents and gets a
/// point-mass CPT on the forced state. Other CPTs are untouched.
pub fn apply_do(net: &Network, d: &DoAssignment) -> Result<Network> {
    let replacements = d
        .resolve(net)?
        .into_iter()
        .map(|(v, s)| {
            let mut row = vec![0.0; net.cardinality(v)];
            row[s] = 1.0;
            (v, Vec::new(), Cpt::from_flat(row.len(), row))
        })
        .collect();
    net.with_replaced(replacements)
}

fn check_disjoint(evidence: &Evidence, d: &DoAssignment) -> Result<()> {
    match d.iter().find(|(v, _)| evidence.contains(v)) {
        Some((v, _)) => Err(Error::Overlap(v.to_string())),
        None => Ok(()),
    }
}

/// P(target | evidence, do(d)), conditioning on the mutilated network.
///
/// Bit-identical to `query_posterior(&apply_do(net, d)?, target, evidence)`:
/// a clamped variable contributes the same point-mass factor either way.
pub fn interventional_query(
    net: &Network,
    target: &str,
    evidence: &Evidence,
    d: &DoAssignment,
) -> Result<Distribution> {
    check_disjoint(evidence, d)?;
    let t = net.index_of(target)?;
    let ev = evidence.resolve(net)?;
    let clamps = clamps_for(net, d)?;
    let probs = Elimination {
        net,
        clamps: &clamps,
        evidence: &ev,
        order: None,
    }
    .posterior(t)?;
    let var = net.variable(t);
    Ok(Distribution {
        variable: var.name.clone(),
        states: var.states.clone(),
        probs,
    })
}

/// Interventional joint probability of a full assignment by truncated
/// factorization: zero unless the assignment agrees with `d`, otherwise the
/// product of the non-intervened variables' CPT entries.
pub fn truncated_joint_probability(
    net: &Network,
    d: &DoAssignment,
    assignment: &Assignment,
) -> Result<f64> {
    let clamps = clamps_for(net, d)?;
    let states = assignment.states();
    let mut p = 1.0;
    for v in 0..net.len() {
        match clamps[v] {
            Some(s) if states[v] != s => return Ok(0.0),
            Some(_) => {}
            None => p *= net.cpt(v).row(net.row_index(v, states))[states[v]],
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::query_posterior;
    use crate::model::parse_network;

    const DEMO: &str = r#"{"name": "demo", "variables": [
        {"name": "X", "states": ["x0", "x1"], "parents": [], "cpt": [[0.7, 0.3]]},
        {"name": "Y", "states": ["y0", "y1"], "parents": ["X"], "cpt": [[0.8, 0.2], [0.1, 0.9]]}
    ]}"#;

    fn d(pairs: &[(&str, &str)]) -> DoAssignment {
        DoAssignment::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn do_on_root_forces_cpt() {
        let net = parse_network(DEMO).unwrap();
        let m = apply_do(&net, &d(&[("X", "x1")])).unwrap();
        assert_eq!(m.cpt(0).to_rows(), vec![vec![0.0, 1.0]]);
        let y = query_posterior(&m, "Y", &Evidence::new()).unwrap();
        assert!((y.probability("y1").unwrap() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn do_on_child_severs_edge() {
        let net = parse_network(DEMO).unwrap();
        let m = apply_do(&net, &d(&[("Y", "y0")])).unwrap();
        assert!(m.variable(1).parents.is_empty());
        assert_eq!(m.cpt(0), net.cpt(0));
        let x = query_posterior(&m, "X", &Evidence::new()).unwrap();
        assert!((x.probability("x1").unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn empty_do_is_identity() {
        let net = parse_network(DEMO).unwrap();
        assert_eq!(apply_do(&net, &DoAssignment::new()).unwrap(), net);
    }

    #[test]
    fn interventional_examples() {
        let net = parse_network(DEMO).unwrap();
        let none = Evidence::new();
        let p = interventional_query(&net, "Y", &none, &d(&[("X", "x1")])).unwrap();
        assert!((p.probs[1] - 0.9).abs() < 1e-15);
        let p = interventional_query(&net, "X", &none, &d(&[("Y", "y1")])).unwrap();
        assert!((p.probs[1] - 0.3).abs() < 1e-15);
        let p = interventional_query(&net, "Y", &none, &d(&[("X", "x0")])).unwrap();
        assert!((p.probs[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn overlap_is_rejected() {
        let net = parse_network(DEMO).unwrap();
        let ev = Evidence::from_pairs([("X", "x0")]).unwrap();
        let err = interventional_query(&net, "Y", &ev, &d(&[("X", "x1")])).unwrap_err();
        assert_eq!(err, Error::Overlap("X".into()));
    }

    #[test]
    fn unknown_names_are_rejected() {
        let net = parse_network(DEMO).unwrap();
        assert!(matches!(
            apply_do(&net, &d(&[("Q", "x1")])),
            Err(Error::UnknownVariable(_))
        ));
        assert!(matches!(
            apply_do(&net, &d(&[("X", "x9")])),
            Err(Error::UnknownState { .. })
        ));
    }

    #[test]
    fn truncated_factorization_on_demo() {
        let net = parse_network(DEMO).unwrap();
        let policy = d(&[("X", "x1")]);
        let hit = Assignment::from_names(&net, [("X", "x1"), ("Y", "y1")]).unwrap();
        let miss = Assignment::from_names(&net, [("X", "x0"), ("Y", "y1")]).unwrap();
        assert!((truncated_joint_probability(&net, &policy, &hit).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(
            truncated_joint_probability(&net, &policy, &miss).unwrap(),
            0.0
        );
    }
}
