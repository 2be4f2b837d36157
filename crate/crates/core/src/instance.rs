//! JSON instance format.
//!
//! ```json
//! {"n_agents": 3, "domains": [2, 2, 2],
//!  "edges": [{"i": 0, "j": 1, "costs": [0.0, 1.0, 1.0, 0.0]}],
//!  "meta": {"family": "random", "seed": 7, "params": {"density": 0.1}}}
//! ```
//!
//! Costs are row-major with rows indexing agent `i`. Edges must be canonical (`i < j`).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{Problem, ProblemError, ProblemParts, RawEdge, Violation};
use crate::scalar::Scalar;

/// Provenance of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub family: String,
    pub seed: u64,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    n_agents: usize,
    domains: Vec<usize>,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<InstanceMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRecord {
    i: usize,
    j: usize,
    costs: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance json")]
    Json(#[from] serde_json::Error),
    #[error("instance i/o")]
    Io(#[from] std::io::Error),
    #[error("n_agents is {n_agents} but {domains} domains were given")]
    AgentCount { n_agents: usize, domains: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

pub fn to_json<S: Scalar>(problem: &Problem<S>) -> String {
    let file = InstanceFile {
        n_agents: problem.n_agents(),
        domains: problem.domains().iter().map(|d| d.size()).collect(),
        edges: problem
            .edges()
            .iter()
            .map(|e| EdgeRecord { i: e.i, j: e.j, costs: e.table.costs().iter().map(|c| c.as_f64()).collect() })
            .collect(),
        meta: problem.meta().cloned(),
    };
    serde_json::to_string(&file).expect("instance serialization cannot fail")
}

pub fn from_json<S: Scalar>(text: &str) -> Result<Problem<S>, InstanceError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    if file.n_agents != file.domains.len() {
        return Err(InstanceError::AgentCount { n_agents: file.n_agents, domains: file.domains.len() });
    }
    // orientation is checked before anything else so a reversed edge is reported as such
    let reversed: Vec<Violation> = file
        .edges
        .iter()
        .filter(|e| e.i >= e.j)
        .map(|e| if e.i == e.j { Violation::SelfLoop { agent: e.i } } else { Violation::NonCanonical { i: e.i, j: e.j } })
        .collect();
    if !reversed.is_empty() {
        return Err(ProblemError::Invalid(reversed).into());
    }
    let parts = ProblemParts {
        domains: file.domains,
        edges: file
            .edges
            .into_iter()
            .map(|e| RawEdge { i: e.i, j: e.j, costs: e.costs.into_iter().map(S::lit).collect() })
            .collect(),
    };
    let problem = Problem::new(parts)?;
    Ok(match file.meta {
        Some(meta) => problem.with_meta(meta),
        None => problem,
    })
}

pub fn read<S: Scalar>(mut reader: impl Read) -> Result<Problem<S>, InstanceError> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    from_json(&text)
}

pub fn load<S: Scalar>(path: impl AsRef<Path>) -> Result<Problem<S>, InstanceError> {
    read(std::fs::File::open(path)?)
}

pub fn write<S: Scalar>(problem: &Problem<S>, mut writer: impl Write) -> Result<(), InstanceError> {
    writer.write_all(to_json(problem).as_bytes())?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn save<S: Scalar>(problem: &Problem<S>, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write(problem, &mut f)?;
    f.flush()?;
    Ok(())
}
