use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::space::InterventionSpace;
use crate::error::{Error, Result};
use crate::inference::Elimination;
use crate::limits::Limits;
use crate::model::{DoAssignment, Evidence, Network};
use crate::par::{map_reduce, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

impl Direction {
    /// True if `a` is strictly better than `b` in this direction.
    fn improves(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Max => a > b,
            Direction::Min => a < b,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Max => "max",
            Direction::Min => "min",
        })
    }
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Direction::Max),
            "min" => Ok(Direction::Min),
            other => Err(format!("direction must be `max` or `min`, got `{other}`")),
        }
    }
}

/// Extremum of a target probability over an intervention space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub direction: Direction,
    pub value: f64,
    /// Policy attaining `value`; variables left uncontrolled are absent.
    pub witness: DoAssignment,
    /// Policies evaluated.
    pub explored: u64,
}

/// Progress counter and cancellation flag shared with a running search.
#[derive(Debug, Default)]
pub struct SearchControl {
    explored: AtomicU64,
    total: AtomicU64,
    cancelled: AtomicBool,
}

impl SearchControl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.cancelled.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.cancelled.load(Ordering::Relaxed)
    }

    /// `(explored, total)` policies so far.
    pub fn progress(&self) -> (u64, u64) {
        (
            self.explored.load(Ordering::Relaxed),
            self.total.load(Ordering::Relaxed),
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SearchOptions<'a> {
    pub limits: Limits,
    pub strategy: Strategy,
    pub control: Option<&'a SearchControl>,
}

/// Mixed-radix enumeration of a space's policies. Axes follow declaration
/// order with the first axis most significant, and each axis lists
/// abstention before the allowed states, so index order is lexicographic
/// policy order.
pub(crate) struct SearchPlan {
    n_vars: usize,
    axes: Vec<(usize, Vec<Option<usize>>)>,
    size: usize,
}

impl SearchPlan {
    pub fn new(
        net: &Network,
        space: &InterventionSpace,
        evidence: &Evidence,
        limits: &Limits,
    ) -> Result<Self> {
        let axes = space.resolve(net)?;
        if let Some(e) = space
            .interventions
            .iter()
            .find(|e| evidence.contains(&e.variable))
        {
            return Err(Error::Overlap(e.variable.clone()));
        }
        let size = space.size();
        if size > limits.bound_cap {
            return Err(Error::CapExceeded {
                what: "intervention space",
                size,
                cap: limits.bound_cap,
            });
        }
        Ok(Self {
            n_vars: net.len(),
            axes,
            size: size as usize,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn clamps(&self, mut index: usize) -> Vec<Option<usize>> {
        let mut clamps = vec![None; self.n_vars];
        for (v, options) in self.axes.iter().rev() {
            clamps[*v] = options[index % options.len()];
            index /= options.len();
        }
        clamps
    }

    pub fn witness(&self, net: &Network, index: usize) -> DoAssignment {
        self.clamps(index)
            .into_iter()
            .enumerate()
            .filter_map(|(v, s)| {
                s.map(|s| {
                    (
                        net.variable(v).name.clone(),
                        net.variable(v).states[s].clone(),
                    )
                })
            })
            .collect()
    }
}

/// Best `(index, value)` over all policies; ties go to the lower index.
/// `score` returns `None` for policies under which the query is undefined.
pub(crate) fn search<S>(
    plan: &SearchPlan,
    direction: Direction,
    opts: &SearchOptions,
    score: S,
) -> Result<Option<(usize, f64)>>
where
    S: Fn(&[Option<usize>]) -> Result<Option<f64>> + Sync + Send,
{
    if let Some(c) = opts.control {
        c.total.store(plan.size as u64, Ordering::Relaxed);
        c.explored.store(0, Ordering::Relaxed);
    }
    let pick = |a: Option<(usize, f64)>, b: Option<(usize, f64)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if direction.improves(a.1, b.1) || (a.1 == b.1 && a.0 < b.0) {
                Some(a)
            } else {
                Some(b)
            }
        }
    };
    map_reduce(
        opts.strategy,
        plan.size,
        None,
        |i| {
            if let Some(c) = opts.control {
                if c.is_cancelled() {
                    return Err(Error::Cancelled);
                }
            }
            let value = score(&plan.clamps(i))?;
            if let Some(c) = opts.control {
                c.explored.fetch_add(1, Ordering::Relaxed);
            }
            Ok(value.map(|v| (i, v)))
        },
        pick,
    )
}

pub fn bound_interventions(
    net: &Network,
    target: &str,
    target_state: &str,
    evidence: &Evidence,
    space: &InterventionSpace,
    direction: Direction,
) -> Result<BoundResult> {
    bound_interventions_with(
        net,
        target,
        target_state,
        evidence,
        space,
        direction,
        &SearchOptions::default(),
    )
}

/// Checks a bound request without searching: names resolve, evidence and
/// space are disjoint, and the space is within the cap. Returns the number of
/// policies a search would evaluate.
pub fn check_bound_request(
    net: &Network,
    target: &str,
    target_state: &str,
    evidence: &Evidence,
    space: &InterventionSpace,
    limits: &Limits,
) -> Result<u64> {
    net.resolve(target, target_state)?;
    evidence.resolve(net)?;
    SearchPlan::new(net, space, evidence, limits).map(|p| p.size() as u64)
}

/// Exact extremum of P(target = target_state | evidence, do(a)) over every
/// policy `a` in `space`, by exhaustive evaluation.
pub fn bound_interventions_with(
    net: &Network,
    target: &str,
    target_state: &str,
    evidence: &Evidence,
    space: &InterventionSpace,
    direction: Direction,
    opts: &SearchOptions,
) -> Result<BoundResult> {
    let (t, ts) = net.resolve(target, target_state)?;
    let ev = evidence.resolve(net)?;
    let plan = SearchPlan::new(net, space, evidence, &opts.limits)?;
    let found = search(&plan, direction, opts, |clamps| {
        let posterior = Elimination {
            net,
            clamps,
            evidence: &ev,
            order: None,
        }
        .posterior(t);
        match posterior {
            Ok(p) => Ok(Some(p[ts])),
            Err(Error::InconsistentEvidence) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let (index, value) = found.ok_or(Error::InconsistentEvidence)?;
    Ok(BoundResult {
        direction,
        value,
        witness: plan.witness(net, index),
        explored: plan.size() as u64,
    })
}
