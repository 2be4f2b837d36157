//! Problem representation: domains, binary constraint tables and the constraint graph.

use std::fmt;

use thiserror::Error;

use crate::instance::InstanceMeta;
use crate::scalar::Scalar;

/// Finite domain `0..size` of one agent's variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Domain {
    size: usize,
}

impl Domain {
    pub fn new(size: usize) -> Option<Self> {
        (size >= 1).then_some(Self { size })
    }

    pub fn size(self) -> usize {
        self.size
    }

    pub fn values(self) -> std::ops::Range<usize> {
        0..self.size
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("invalid problem: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("assignment has {found} values, problem has {expected} agents")]
    AssignmentLength { expected: usize, found: usize },
    #[error("value {value} of agent {agent} is outside its domain of size {size}")]
    ValueOutOfDomain { agent: usize, value: usize, size: usize },
    #[error("agent index {agent} out of range ({n_agents} agents)")]
    AgentOutOfRange { agent: usize, n_agents: usize },
    #[error("table index ({row}, {col}) out of range for a {rows}x{cols} table")]
    TableIndex { row: usize, col: usize, rows: usize, cols: usize },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One broken problem invariant, as reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoAgents,
    EmptyDomain { agent: usize },
    SelfLoop { agent: usize },
    EndpointOutOfRange { i: usize, j: usize },
    NonCanonical { i: usize, j: usize },
    DuplicateEdge { i: usize, j: usize },
    ShapeMismatch { i: usize, j: usize, expected: usize, found: usize },
    NegativeCost { i: usize, j: usize, index: usize },
    NonFiniteCost { i: usize, j: usize, index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NoAgents => write!(f, "no agents"),
            Violation::EmptyDomain { agent } => write!(f, "empty domain for agent {agent}"),
            Violation::SelfLoop { agent } => write!(f, "self loop on agent {agent}"),
            Violation::EndpointOutOfRange { i, j } => {
                write!(f, "edge ({i}, {j}) has an endpoint out of range")
            }
            Violation::NonCanonical { i, j } => {
                write!(f, "non-canonical edge ({i}, {j}): expected i < j")
            }
            Violation::DuplicateEdge { i, j } => write!(f, "duplicate edge ({i}, {j})"),
            Violation::ShapeMismatch { i, j, expected, found } => write!(
                f,
                "shape mismatch on edge ({i}, {j}): expected {expected} entries, found {found}"
            ),
            Violation::NegativeCost { i, j, index } => {
                write!(f, "negative cost on edge ({i}, {j}) at entry {index}")
            }
            Violation::NonFiniteCost { i, j, index } => {
                write!(f, "non-finite cost on edge ({i}, {j}) at entry {index}")
            }
        }
    }
}

/// Dense cost matrix of a binary constraint, with its extreme values cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintTable<S> {
    rows: usize,
    cols: usize,
    costs: Vec<S>,
    min_cost: S,
    max_cost: S,
}

impl<S: Scalar> ConstraintTable<S> {
    /// Builds a table from row-major costs. Returns the list of broken invariants on failure.
    pub fn new(rows: usize, cols: usize, costs: Vec<S>) -> Result<Self, Vec<Violation>> {
        let mut violations = Vec::new();
        check_costs(0, 0, rows, cols, &costs, &mut violations);
        if !violations.is_empty() {
            return Err(violations);
        }
        Ok(Self::from_checked(rows, cols, costs))
    }

    fn from_checked(rows: usize, cols: usize, costs: Vec<S>) -> Self {
        let mut min_cost = S::infinity();
        let mut max_cost = S::neg_infinity();
        for &c in &costs {
            min_cost = min_cost.min(c);
            max_cost = max_cost.max(c);
        }
        Self { rows, cols, costs, min_cost, max_cost }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Result<Self, Vec<Violation>> {
        let costs = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| (r, c)))
            .map(|(r, c)| f(r, c))
            .collect();
        Self::new(rows, cols, costs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major cost entries.
    pub fn costs(&self) -> &[S] {
        &self.costs
    }

    pub fn min_cost(&self) -> S {
        self.min_cost
    }

    pub fn max_cost(&self) -> S {
        self.max_cost
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> S {
        debug_assert!(row < self.rows && col < self.cols);
        self.costs[row * self.cols + col]
    }

    /// Cost seen from one endpoint: `self_is_row` selects whether the caller's
    /// value indexes rows (the lower-indexed endpoint) or columns.
    #[inline]
    pub fn oriented(&self, self_is_row: bool, d_self: usize, d_other: usize) -> S {
        if self_is_row {
            self.get(d_self, d_other)
        } else {
            self.get(d_other, d_self)
        }
    }

    /// Bounds-checked variant of [`ConstraintTable::oriented`].
    pub fn oriented_lookup(&self, self_is_row: bool, d_self: usize, d_other: usize) -> Result<S, ProblemError> {
        let (row, col) = if self_is_row { (d_self, d_other) } else { (d_other, d_self) };
        if row >= self.rows || col >= self.cols {
            return Err(ProblemError::TableIndex { row, col, rows: self.rows, cols: self.cols });
        }
        Ok(self.get(row, col))
    }

    /// Size of the caller's own dimension.
    pub fn self_size(&self, self_is_row: bool) -> usize {
        if self_is_row {
            self.rows
        } else {
            self.cols
        }
    }

    pub fn other_size(&self, self_is_row: bool) -> usize {
        self.self_size(!self_is_row)
    }
}

fn check_costs<S: Scalar>(i: usize, j: usize, rows: usize, cols: usize, costs: &[S], out: &mut Vec<Violation>) {
    if costs.len() != rows * cols {
        out.push(Violation::ShapeMismatch { i, j, expected: rows * cols, found: costs.len() });
    }
    for (index, &c) in costs.iter().enumerate() {
        if !c.is_finite() {
            out.push(Violation::NonFiniteCost { i, j, index });
        } else if c < S::zero() {
            out.push(Violation::NegativeCost { i, j, index });
        }
    }
}

/// Binary constraint between agents `i < j`; table rows index `i`'s domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<S> {
    pub i: usize,
    pub j: usize,
    pub table: ConstraintTable<S>,
}

/// One endpoint's view of an incident edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub neighbor: usize,
    pub edge: usize,
    /// True when the owning agent is the edge's `i` (row) endpoint.
    pub self_is_row: bool,
}

/// Unvalidated problem description, as read from an instance file or built by hand.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParts<S> {
    pub domains: Vec<usize>,
    pub edges: Vec<RawEdge<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawEdge<S> {
    pub i: usize,
    pub j: usize,
    /// Row-major, `domains[i]` rows by `domains[j]` columns.
    pub costs: Vec<S>,
}

/// Checks every problem invariant on unvalidated parts. Never panics.
pub fn validate<S: Scalar>(parts: &ProblemParts<S>) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let n = parts.domains.len();
    if n == 0 {
        out.push(Violation::NoAgents);
    }
    for (agent, &size) in parts.domains.iter().enumerate() {
        if size == 0 {
            out.push(Violation::EmptyDomain { agent });
        }
    }
    let mut seen = std::collections::HashSet::new();
    for e in &parts.edges {
        let (i, j) = (e.i, e.j);
        if i >= n || j >= n {
            out.push(Violation::EndpointOutOfRange { i, j });
            continue;
        }
        if i == j {
            out.push(Violation::SelfLoop { agent: i });
            continue;
        }
        if i > j {
            out.push(Violation::NonCanonical { i, j });
        }
        if !seen.insert((i.min(j), i.max(j))) {
            out.push(Violation::DuplicateEdge { i, j });
        }
        check_costs(i, j, parts.domains[i], parts.domains[j], &e.costs, &mut out);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A validated, immutable binary DCOP.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<S = f64> {
    domains: Vec<Domain>,
    edges: Vec<Edge<S>>,
    neighbors: Vec<Vec<Incidence>>,
    meta: Option<InstanceMeta>,
}

impl<S: Scalar> Problem<S> {
    pub fn new(parts: ProblemParts<S>) -> Result<Self, ProblemError> {
        validate(&parts).map_err(ProblemError::Invalid)?;
        let domains: Vec<Domain> = parts.domains.iter().map(|&s| Domain { size: s }).collect();
        let mut neighbors = vec![Vec::new(); domains.len()];
        let edges: Vec<Edge<S>> = parts
            .edges
            .into_iter()
            .enumerate()
            .map(|(idx, e)| {
                neighbors[e.i].push(Incidence { neighbor: e.j, edge: idx, self_is_row: true });
                neighbors[e.j].push(Incidence { neighbor: e.i, edge: idx, self_is_row: false });
                let table = ConstraintTable::from_checked(domains[e.i].size, domains[e.j].size, e.costs);
                Edge { i: e.i, j: e.j, table }
            })
            .collect();
        for list in &mut neighbors {
            list.sort_by_key(|inc| inc.neighbor);
        }
        Ok(Self { domains, edges, neighbors, meta: None })
    }

    pub fn with_meta(mut self, meta: InstanceMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn meta(&self) -> Option<&InstanceMeta> {
        self.meta.as_ref()
    }

    pub fn n_agents(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn domain(&self, agent: usize) -> Domain {
        self.domains[agent]
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge<S> {
        &self.edges[index]
    }

    /// Incident edges of `agent`, sorted by neighbor index.
    pub fn neighbors(&self, agent: usize) -> &[Incidence] {
        &self.neighbors[agent]
    }

    pub fn degree(&self, agent: usize) -> usize {
        self.neighbors[agent].len()
    }

    /// Position of `neighbor` in `agent`'s incidence list.
    pub fn incidence_index(&self, agent: usize, neighbor: usize) -> Option<usize> {
        self.neighbors
            .get(agent)?
            .binary_search_by_key(&neighbor, |inc| inc.neighbor)
            .ok()
    }

    pub fn is_neighbor(&self, agent: usize, other: usize) -> bool {
        self.incidence_index(agent, other).is_some()
    }

    pub fn table(&self, inc: &Incidence) -> &ConstraintTable<S> {
        &self.edges[inc.edge].table
    }

    pub fn check_assignment(&self, values: &[usize]) -> Result<(), ProblemError> {
        if values.len() != self.n_agents() {
            return Err(ProblemError::AssignmentLength { expected: self.n_agents(), found: values.len() });
        }
        for (agent, (&value, d)) in values.iter().zip(&self.domains).enumerate() {
            if value >= d.size {
                return Err(ProblemError::ValueOutOfDomain { agent, value, size: d.size });
            }
        }
        Ok(())
    }

    /// Sum of all constraint costs under `values`.
    pub fn total_cost(&self, values: &[usize]) -> Result<S, ProblemError> {
        self.check_assignment(values)?;
        Ok(self.total_cost_unchecked(values))
    }

    pub(crate) fn total_cost_unchecked(&self, values: &[usize]) -> S {
        self.edges.iter().fold(S::zero(), |acc, e| acc + e.table.get(values[e.i], values[e.j]))
    }

    /// Sum of the costs of the constraints incident to `agent`.
    pub fn local_cost(&self, agent: usize, values: &[usize]) -> Result<S, ProblemError> {
        if agent >= self.n_agents() {
            return Err(ProblemError::AgentOutOfRange { agent, n_agents: self.n_agents() });
        }
        self.check_assignment(values)?;
        Ok(self.neighbors[agent].iter().fold(S::zero(), |acc, inc| {
            acc + self.table(inc).oriented(inc.self_is_row, values[agent], values[inc.neighbor])
        }))
    }

    pub fn to_parts(&self) -> ProblemParts<S> {
        ProblemParts {
            domains: self.domains.iter().map(|d| d.size).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge { i: e.i, j: e.j, costs: e.table.costs.clone() })
                .collect(),
        }
    }
}

/// Complete joint assignment, one domain index per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new<S: Scalar>(problem: &Problem<S>, values: Vec<usize>) -> Result<Self, ProblemError> {
        problem.check_assignment(&values)?;
        Ok(Self(values))
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl std::ops::Deref for Assignment {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}
