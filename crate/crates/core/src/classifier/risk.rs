use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open band `[lower, upper)`; the last band of a table also includes 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskBand {
    pub lower: f64,
    pub upper: f64,
    pub label: String,
}

/// Contiguous bands covering `[0, 1]`, mapping a probability to a risk group.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct RiskTable {
    bands: Vec<RiskBand>,
}

impl Default for RiskTable {
    /// LNM risk groups: <1% very low, 1-5% low, 6-15% intermediate,
    /// 16-25% high-intermediate, >25% high, with the gaps closed upward.
    fn default() -> Self {
        let band = |lower: f64, upper: f64, label: &str| RiskBand {
            lower,
            upper,
            label: label.to_string(),
        };
        Self {
            bands: vec![
                band(0.0, 0.01, "Very low"),
                band(0.01, 0.06, "Low"),
                band(0.06, 0.16, "Intermediate"),
                band(0.16, 0.26, "High-intermediate"),
                band(0.26, 1.0, "High"),
            ],
        }
    }
}

impl RiskTable {
    pub fn new(bands: Vec<RiskBand>) -> Result<Self> {
        let (Some(first), Some(last)) = (bands.first(), bands.last()) else {
            return Err(Error::InvalidRiskTable("no bands".into()));
        };
        if first.lower != 0.0 {
            return Err(Error::InvalidRiskTable(format!(
                "first band starts at {}, not 0",
                first.lower
            )));
        }
        if last.upper != 1.0 {
            return Err(Error::InvalidRiskTable(format!(
                "last band ends at {}, not 1",
                last.upper
            )));
        }
        for b in &bands {
            if !(b.lower < b.upper) {
                return Err(Error::InvalidRiskTable(format!(
                    "band `{}` is empty",
                    b.label
                )));
            }
        }
        for w in bands.windows(2) {
            if w[0].upper != w[1].lower {
                return Err(Error::InvalidRiskTable(format!(
                    "bands `{}` and `{}` are not contiguous",
                    w[0].label, w[1].label
                )));
            }
        }
        Ok(Self { bands })
    }

    /// Bands from the interior edges and labels (`labels.len() == edges.len() + 1`).
    pub fn from_edges(edges: &[f64], labels: &[&str]) -> Result<Self> {
        if labels.len() != edges.len() + 1 {
            return Err(Error::InvalidRiskTable(
                "need one more label than edges".into(),
            ));
        }
        let bounds: Vec<f64> = std::iter::once(0.0)
            .chain(edges.iter().copied())
            .chain([1.0])
            .collect();
        Self::new(
            bounds
                .windows(2)
                .zip(labels)
                .map(|(w, l)| RiskBand {
                    lower: w[0],
                    upper: w[1],
                    label: l.to_string(),
                })
                .collect(),
        )
    }

    pub fn bands(&self) -> &[RiskBand] {
        &self.bands
    }

    /// Label of the band containing `p`; values outside `[0, 1]` are clamped.
    pub fn group(&self, p: f64) -> &str {
        let p = if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) };
        self.bands
            .iter()
            .find(|b| b.lower <= p && p < b.upper)
            .unwrap_or_else(|| self.bands.last().expect("nonempty table"))
            .label
            .as_str()
    }
}

impl<'de> Deserialize<'de> for RiskTable {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let bands = Vec::<RiskBand>::deserialize(deserializer)?;
        RiskTable::new(bands).map_err(serde::de::Error::custom)
    }
}

pub fn risk_group(table: &RiskTable, p: f64) -> &str {
    table.group(p)
}
