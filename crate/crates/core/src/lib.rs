//! Simulator for distributed constraint optimization problems (DCOPs).
//!
//! Agents own one variable each and exchange messages with constraint neighbors
//! in synchronous rounds ([`engine`]). Implemented algorithms: distributed guided
//! local search and GDBA ([`gls`]), DSA, MGM and MGM2 ([`local_search`]) and
//! damped max-sum ([`maxsum`]). [`benchmarks`] generates seeded instances and
//! [`experiment`] runs and aggregates sweeps.
//!
//! ```
//! use dcop_core::{benchmarks, engine, AlgorithmConfig, Problem};
//!
//! let params = benchmarks::GeneratorParams::Lattice(benchmarks::LatticeParams { rows: 3, cols: 3, ..Default::default() });
//! let problem: Problem = benchmarks::generate(&params, 1).unwrap();
//! let algo: AlgorithmConfig = serde_json::from_str(r#"{"algo":"dgls","manner":"M","gamma":0.5,"scope":"col"}"#).unwrap();
//! let trace = engine::run(&problem, algo.factory(), &engine::RunOptions::new(50, 7)).unwrap();
//! assert!(trace.final_best() <= trace.initial.current_cost);
//! ```

pub mod algorithm;
pub mod benchmarks;
pub mod engine;
pub mod experiment;
pub mod gls;
pub mod instance;
pub mod local_search;
pub mod maxsum;
pub mod problem;
pub mod response;
mod scalar;

pub use algorithm::AlgorithmConfig;
pub use instance::InstanceMeta;
pub use problem::{Assignment, ConstraintTable, Domain, Edge, Incidence, Problem, ProblemError, ProblemParts, RawEdge, Violation};
pub use scalar::Scalar;

pub type Problem64 = Problem<f64>;
pub type Problem32 = Problem<f32>;
pub type ConstraintTable64 = ConstraintTable<f64>;
pub type ConstraintTable32 = ConstraintTable<f32>;
pub type CostModifier64 = gls::CostModifier<f64>;
pub type CostModifier32 = gls::CostModifier<f32>;
