//! Penalty-based breakout: guided local search with coordinated penalties (DGLS)
//! and the generalized distributed breakout algorithm (GDBA).

mod dgls;
mod effective;
mod gdba;
mod modifier;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use dgls::{DglsAgent, DglsConfig};
pub use effective::{adaptive_probability, eff_cost, effective_lookup, is_violated_adaptive, is_violated_fixed, potential};
pub use gdba::{GdbaAgent, GdbaConfig};
pub use modifier::{increase_mod, increase_unilateral, CostModifier};

/// How a penalty enters the effective cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Manner {
    #[serde(rename = "A", alias = "additive")]
    Additive,
    #[serde(rename = "M", alias = "multiplicative")]
    Multiplicative,
}

/// Which modifier entries a breakout raises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    #[serde(rename = "cel", alias = "cell")]
    Cell,
    #[serde(rename = "tab", alias = "table", alias = "T")]
    Table,
    #[serde(rename = "row")]
    Row,
    #[serde(rename = "col", alias = "column")]
    Column,
}

/// When a constraint counts as violated at the current assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationRule {
    /// Violated with probability equal to the normalized cost.
    #[serde(rename = "AD", alias = "adaptive")]
    Adaptive,
    /// Cost above zero.
    #[serde(rename = "NZ")]
    NonZero,
    /// Cost above the table minimum.
    #[serde(rename = "NM")]
    NonMinimum,
    /// Cost equal to the table maximum.
    #[serde(rename = "MX")]
    Maximum,
}

/// Per-round breakout bookkeeping, indexed like the agent's incidence list.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PenaltySets {
    /// Constraints this agent flagged as violated.
    pub self_penalized: Vec<bool>,
    /// Constraints a neighbor flagged and announced with a SYNC.
    pub neighbor_penalized: Vec<bool>,
}

impl PenaltySets {
    pub fn new(degree: usize) -> Self {
        Self { self_penalized: vec![false; degree], neighbor_penalized: vec![false; degree] }
    }

    pub fn clear(&mut self) {
        self.self_penalized.fill(false);
        self.neighbor_penalized.fill(false);
    }

    pub fn touched(&self, k: usize) -> bool {
        self.self_penalized[k] || self.neighbor_penalized[k]
    }
}

impl fmt::Display for Manner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Manner::Additive => "A",
            Manner::Multiplicative => "M",
        })
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Cell => "cel",
            Scope::Table => "tab",
            Scope::Row => "row",
            Scope::Column => "col",
        })
    }
}

impl fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationRule::Adaptive => "AD",
            ViolationRule::NonZero => "NZ",
            ViolationRule::NonMinimum => "NM",
            ViolationRule::Maximum => "MX",
        })
    }
}
