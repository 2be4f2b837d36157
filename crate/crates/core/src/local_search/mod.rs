//! Baseline local search: DSA, MGM and MGM2.

mod dsa;
mod mgm;
mod mgm2;

pub use dsa::{DsaAgent, DsaConfig};
pub use mgm::{MgmAgent, MgmConfig};
pub use mgm2::{Mgm2Agent, Mgm2Config};
