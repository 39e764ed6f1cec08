use serde::{Deserialize, Serialize};

/// Environment variable that overrides every enumeration cap.
pub const CAP_ENV_VAR: &str = "INTERVENE_BN_CAP";

/// Size caps for the exhaustive procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Full joint assignments enumerated by the oracle.
    pub joint_cap: u128,
    /// Joint intervention assignments searched by a bound.
    pub bound_cap: u128,
    /// Feature instantiations compiled into a decision diagram.
    pub diagram_cap: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            joint_cap: 1 << 20,
            bound_cap: 1_000_000,
            diagram_cap: 1 << 20,
        }
    }
}

impl Limits {
    pub fn uniform(cap: u128) -> Self {
        Self {
            joint_cap: cap,
            bound_cap: cap,
            diagram_cap: cap,
        }
    }

    /// Defaults, or a single cap for everything if `INTERVENE_BN_CAP` holds a
    /// positive integer.
    pub fn from_env() -> Self {
        std::env::var(CAP_ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<u128>().ok())
            .filter(|&cap| cap > 0)
            .map_or_else(Self::default, Self::uniform)
    }
}
