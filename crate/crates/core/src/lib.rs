//! Causal analysis of discrete Bayesian networks: exact posterior queries,
//! do-interventions, exact worst/best-case bounds over intervention policies,
//! posterior-threshold classifiers compiled to ordered decision diagrams, and
//! sensitivity reporting.

pub mod causal;
pub mod classifier;
pub mod error;
mod factor;
pub mod inference;
pub mod limits;
pub mod model;
mod par;
pub mod sensitivity;

pub use causal::{
    apply_do, bound_interventions, bound_interventions_with, check_bound_request,
    interventional_query, truncated_joint_probability, BoundResult, Direction, InterventionEntry,
    InterventionSpace, SearchControl, SearchOptions,
};
pub use classifier::{
    classify, compile_odd, compile_odd_with, error_bound, error_bound_with, misclassification,
    risk_group, Classification, ClassifierConfig, ErrorBound, ErrorKind, Label, Misclassification,
    Odd, OddOptions, RiskBand, RiskTable, TargetSpec, VariableOrder,
};
pub use error::{Error, Result};
pub use inference::{
    enumerate_joint, enumerate_joint_with, evidence_probability, joint_probability,
    query_posterior, query_posterior_with_order, Distribution, JointTable,
};
pub use limits::Limits;
pub use model::{
    parse_network, serialize_network, topological_order, validate_network, Assignment,
    DoAssignment, Evidence, FeatureAssignment, Network, NetworkDoc,
};
pub use par::Strategy;
pub use sensitivity::{
    sensitivity_rank, suggest_features, what_if_table, Rendering, SensitivityEntry, TargetRef,
    WhatIfRow,
};

/// Engine version, as recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
