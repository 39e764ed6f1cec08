//! JSON network documents.
//!
//! ```json
//! {"name": "demo",
//!  "variables": [{"name": "X", "states": ["x0", "x1"], "parents": [], "cpt": [[0.7, 0.3]]}]}
//! ```
//!
//! Variables may appear in any order. The serializer writes them in
//! declaration order with 17 significant digits, so a serialized network
//! reparses to bit-identical probabilities and reserializes to the same bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::network::Network;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub name: String,
    pub variables: Vec<VariableDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableDoc {
    pub name: String,
    pub states: Vec<String>,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<Vec<f64>>,
}

impl NetworkDoc {
    /// Reads the document without checking network rules.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn parse_network(text: &str) -> Result<Network> {
    Network::from_doc(NetworkDoc::from_json(text)?)
}

pub fn serialize_network(net: &Network) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"name\": {},", json_string(net.name()));
    out.push_str("  \"variables\": [");
    for (i, (var, cpt)) in net.variables().iter().zip(net.cpts()).enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str("    {\n");
        let _ = writeln!(out, "      \"name\": {},", json_string(&var.name));
        let _ = writeln!(out, "      \"states\": [{}],", string_list(&var.states));
        let _ = writeln!(out, "      \"parents\": [{}],", string_list(&var.parents));
        out.push_str("      \"cpt\": [\n");
        let rows: Vec<String> = cpt
            .rows()
            .map(|row| {
                let cells: Vec<String> = row.iter().map(|&p| format_probability(p)).collect();
                format!("        [{}]", cells.join(", "))
            })
            .collect();
        out.push_str(&rows.join(",\n"));
        out.push_str("\n      ]\n    }");
    }
    if !net.is_empty() {
        out.push_str("\n  ");
    }
    out.push_str("]\n}\n");
    out
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn string_list(items: &[String]) -> String {
    items
        .iter()
        .map(|s| json_string(s))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Shortest positional rendering of `x` carrying 17 significant digits;
/// exponent form outside `1e-7 ..= 1e17`.
pub fn format_probability(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };

    if !(-7..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}
