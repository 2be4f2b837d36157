//! Seeded instance generators.
//!
//! Every generator is a pure function of its parameters and seed. All sampled
//! quantities (costs, weights, travel times) are integers drawn uniformly from
//! inclusive ranges.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::InstanceMeta;
use crate::problem::{Problem, ProblemParts, RawEdge};
use crate::scalar::Scalar;

/// Whole-graph resampling budget when a draw leaves a vertex isolated.
pub const MAX_GRAPH_ATTEMPTS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("no graph without isolated vertices after {attempts} attempts")]
    Isolated { attempts: usize },
}

fn invalid(msg: impl Into<String>) -> GeneratorError {
    GeneratorError::InvalidParams(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomParams {
    #[serde(default = "d::n")]
    pub n: usize,
    #[serde(default = "d::density")]
    pub density: f64,
    #[serde(default = "d::domain")]
    pub domain_size: usize,
    #[serde(default)]
    pub cost_lo: u32,
    #[serde(default = "d::cost_hi")]
    pub cost_hi: u32,
    /// Draw exactly `round(density * n(n-1)/2)` edges instead of independent pairs.
    #[serde(default)]
    pub exact_edges: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleFreeParams {
    #[serde(default = "d::n")]
    pub n: usize,
    #[serde(default = "d::three")]
    pub m0: usize,
    #[serde(default = "d::three")]
    pub m1: usize,
    #[serde(default = "d::domain")]
    pub domain_size: usize,
    #[serde(default)]
    pub cost_lo: u32,
    #[serde(default = "d::cost_hi")]
    pub cost_hi: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    #[serde(default = "d::side")]
    pub rows: usize,
    #[serde(default = "d::side")]
    pub cols: usize,
    #[serde(default = "d::domain")]
    pub domain_size: usize,
    #[serde(default)]
    pub cost_lo: u32,
    #[serde(default = "d::cost_hi")]
    pub cost_hi: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeetingParams {
    #[serde(default = "d::twenty")]
    pub slots: usize,
    #[serde(default = "d::twenty")]
    pub meetings: usize,
    #[serde(default = "d::persons")]
    pub persons: usize,
    #[serde(default = "d::travel_lo")]
    pub travel_lo: u32,
    #[serde(default = "d::travel_hi")]
    pub travel_hi: u32,
    #[serde(default = "d::two")]
    pub meetings_per_person: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WgcParams {
    #[serde(default = "d::n")]
    pub n: usize,
    #[serde(default = "d::three")]
    pub colors: usize,
    #[serde(default = "d::wgc_density")]
    pub density: f64,
    #[serde(default = "d::one")]
    pub weight_lo: u32,
    #[serde(default = "d::cost_hi")]
    pub weight_hi: u32,
    #[serde(default)]
    pub exact_edges: bool,
}

mod d {
    pub fn n() -> usize {
        120
    }
    pub fn density() -> f64 {
        0.1
    }
    pub fn wgc_density() -> f64 {
        0.05
    }
    pub fn domain() -> usize {
        10
    }
    pub fn cost_hi() -> u32 {
        100
    }
    pub fn one() -> u32 {
        1
    }
    pub fn two() -> usize {
        2
    }
    pub fn three() -> usize {
        3
    }
    pub fn side() -> usize {
        10
    }
    pub fn twenty() -> usize {
        20
    }
    pub fn persons() -> usize {
        90
    }
    pub fn travel_lo() -> u32 {
        6
    }
    pub fn travel_hi() -> u32 {
        10
    }
}

macro_rules! full_scale_default {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                serde_json::from_str("{}").expect("all fields have defaults")
            }
        }
    )*};
}
full_scale_default!(RandomParams, ScaleFreeParams, LatticeParams, MeetingParams, WgcParams);

/// A benchmark family with its parameters. Serialized with a `family` tag, e.g.
/// `{"family": "lattice", "rows": 10, "cols": 10}`; omitted fields take the
/// full-scale defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorParams {
    Random(RandomParams),
    ScaleFree(ScaleFreeParams),
    Lattice(LatticeParams),
    MeetingScheduling(MeetingParams),
    WeightedGraphColoring(WgcParams),
}

impl GeneratorParams {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Random(_) => "random",
            Self::ScaleFree(_) => "scale_free",
            Self::Lattice(_) => "lattice",
            Self::MeetingScheduling(_) => "meeting_scheduling",
            Self::WeightedGraphColoring(_) => "weighted_graph_coloring",
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let cost_range = |lo: u32, hi: u32| if lo <= hi { Ok(()) } else { Err(invalid(format!("empty cost range [{lo}, {hi}]"))) };
        let domain = |size: usize| if size >= 1 { Ok(()) } else { Err(invalid("domain size must be at least 1")) };
        let density = |n: usize, p: f64| {
            if n < 2 {
                Err(invalid("need at least 2 agents"))
            } else if !(p > 0.0 && p <= 1.0) {
                Err(invalid(format!("density {p} outside (0, 1]")))
            } else {
                Ok(())
            }
        };
        match self {
            Self::Random(p) => {
                density(p.n, p.density)?;
                domain(p.domain_size)?;
                cost_range(p.cost_lo, p.cost_hi)
            }
            Self::ScaleFree(p) => {
                if !(p.n > p.m0 && p.m0 >= p.m1 && p.m1 >= 1) {
                    return Err(invalid(format!("need n > m0 >= m1 >= 1, got n={} m0={} m1={}", p.n, p.m0, p.m1)));
                }
                domain(p.domain_size)?;
                cost_range(p.cost_lo, p.cost_hi)
            }
            Self::Lattice(p) => {
                if p.rows < 2 || p.cols < 2 {
                    return Err(invalid("lattice needs at least 2 rows and 2 columns"));
                }
                domain(p.domain_size)?;
                cost_range(p.cost_lo, p.cost_hi)
            }
            Self::MeetingScheduling(p) => {
                if p.slots < 1 || p.meetings < 1 {
                    return Err(invalid("need at least one slot and one meeting"));
                }
                if p.meetings_per_person > p.meetings {
                    return Err(invalid("meetings_per_person exceeds meetings"));
                }
                cost_range(p.travel_lo, p.travel_hi)
            }
            Self::WeightedGraphColoring(p) => {
                density(p.n, p.density)?;
                if p.colors < 2 {
                    return Err(invalid("need at least 2 colors"));
                }
                cost_range(p.weight_lo, p.weight_hi)
            }
        }
    }
}

/// Generates an instance; the meta block records the family, seed and every parameter.
pub fn generate<S: Scalar>(params: &GeneratorParams, seed: u64) -> Result<Problem<S>, GeneratorError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (domains, edges) = match params {
        GeneratorParams::Random(p) => {
            let pairs = random_graph(&mut rng, p.n, p.density, p.exact_edges)?;
            (vec![p.domain_size; p.n], uniform_tables(&mut rng, pairs, p.domain_size, p.cost_lo, p.cost_hi))
        }
        GeneratorParams::ScaleFree(p) => {
            let pairs = scale_free_graph(&mut rng, p.n, p.m0, p.m1);
            (vec![p.domain_size; p.n], uniform_tables(&mut rng, pairs, p.domain_size, p.cost_lo, p.cost_hi))
        }
        GeneratorParams::Lattice(p) => {
            let pairs = lattice_graph(p.rows, p.cols);
            (vec![p.domain_size; p.rows * p.cols], uniform_tables(&mut rng, pairs, p.domain_size, p.cost_lo, p.cost_hi))
        }
        GeneratorParams::MeetingScheduling(p) => (vec![p.slots; p.meetings], meeting_edges(&mut rng, p)),
        GeneratorParams::WeightedGraphColoring(p) => {
            let pairs = random_graph(&mut rng, p.n, p.density, p.exact_edges)?;
            let edges = pairs
                .into_iter()
                .map(|(i, j)| {
                    let w = rng.gen_range(p.weight_lo..=p.weight_hi) as f64;
                    let costs = (0..p.colors * p.colors).map(|k| if k / p.colors == k % p.colors { w } else { 0.0 }).collect();
                    RawEdge { i, j, costs }
                })
                .collect();
            (vec![p.colors; p.n], edges)
        }
    };
    let parts = ProblemParts {
        domains,
        edges: edges
            .into_iter()
            .map(|e: RawEdge<f64>| RawEdge { i: e.i, j: e.j, costs: e.costs.into_iter().map(S::lit).collect() })
            .collect(),
    };
    let meta = InstanceMeta {
        family: params.family().to_string(),
        seed,
        params: serde_json::to_value(params).expect("params serialize"),
    };
    let problem = Problem::new(parts).expect("generated instances are well formed");
    Ok(problem.with_meta(meta))
}

pub fn gen_random<S: Scalar>(p: RandomParams, seed: u64) -> Result<Problem<S>, GeneratorError> {
    generate(&GeneratorParams::Random(p), seed)
}

pub fn gen_scale_free<S: Scalar>(p: ScaleFreeParams, seed: u64) -> Result<Problem<S>, GeneratorError> {
    generate(&GeneratorParams::ScaleFree(p), seed)
}

pub fn gen_lattice<S: Scalar>(p: LatticeParams, seed: u64) -> Result<Problem<S>, GeneratorError> {
    generate(&GeneratorParams::Lattice(p), seed)
}

pub fn gen_meeting_scheduling<S: Scalar>(p: MeetingParams, seed: u64) -> Result<Problem<S>, GeneratorError> {
    generate(&GeneratorParams::MeetingScheduling(p), seed)
}

pub fn gen_wgc<S: Scalar>(p: WgcParams, seed: u64) -> Result<Problem<S>, GeneratorError> {
    generate(&GeneratorParams::WeightedGraphColoring(p), seed)
}

/// G(n, p) (or exact edge count), resampled until no vertex is isolated.
fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, exact: bool) -> Result<Vec<(usize, usize)>, GeneratorError> {
    let all_pairs = n * (n - 1) / 2;
    let target = (density * all_pairs as f64).round() as usize;
    for _ in 0..MAX_GRAPH_ATTEMPTS {
        let mut pairs = Vec::new();
        if exact {
            let mut picked = sample(rng, all_pairs, target).into_vec();
            picked.sort_unstable();
            pairs.extend(picked.into_iter().map(|k| unrank_pair(n, k)));
        } else {
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < density {
                        pairs.push((i, j));
                    }
                }
            }
        }
        let mut touched = vec![false; n];
        for &(i, j) in &pairs {
            touched[i] = true;
            touched[j] = true;
        }
        if touched.iter().all(|&t| t) {
            return Ok(pairs);
        }
    }
    Err(GeneratorError::Isolated { attempts: MAX_GRAPH_ATTEMPTS })
}

/// Maps a rank in lexicographic order of pairs `i < j` back to the pair.
fn unrank_pair(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    while k >= n - 1 - i {
        k -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + k)
}

/// Barabasi-Albert growth from a complete graph on `m0` nodes.
fn scale_free_graph(rng: &mut ChaCha8Rng, n: usize, m0: usize, m1: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![0u64; n];
    let mut pairs = Vec::new();
    for i in 0..m0 {
        for j in i + 1..m0 {
            pairs.push((i, j));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    for new in m0..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(m1);
        for _ in 0..m1 {
            let open = |v: &usize| !chosen.contains(v);
            let total: u64 = (0..new).filter(open).map(|v| degree[v]).sum();
            let target = if total == 0 {
                let candidates: Vec<usize> = (0..new).filter(open).collect();
                candidates[rng.gen_range(0..candidates.len())]
            } else {
                let mut r = rng.gen_range(0..total);
                let mut pick = 0;
                for v in (0..new).filter(open) {
                    if r < degree[v] {
                        pick = v;
                        break;
                    }
                    r -= degree[v];
                }
                pick
            };
            chosen.push(target);
        }
        for &t in &chosen {
            pairs.push((t, new));
            degree[t] += 1;
            degree[new] += 1;
        }
    }
    pairs.sort_unstable();
    pairs
}

/// 4-neighbor grid without wraparound; node `(r, c)` has index `r * cols + c`.
fn lattice_graph(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                pairs.push((v, v + 1));
            }
            if r + 1 < rows {
                pairs.push((v, v + cols));
            }
        }
    }
    pairs
}

fn uniform_tables(rng: &mut ChaCha8Rng, pairs: Vec<(usize, usize)>, size: usize, lo: u32, hi: u32) -> Vec<RawEdge<f64>> {
    pairs
        .into_iter()
        .map(|(i, j)| RawEdge { i, j, costs: (0..size * size).map(|_| rng.gen_range(lo..=hi) as f64).collect() })
        .collect()
}

/// Cost of scheduling two meetings with `shared` common attendees at slots `ta`, `tb`.
pub fn meeting_cost(shared: usize, travel: u32, ta: usize, tb: usize) -> usize {
    if ta.abs_diff(tb) < travel as usize {
        shared
    } else {
        0
    }
}

fn meeting_edges(rng: &mut ChaCha8Rng, p: &MeetingParams) -> Vec<RawEdge<f64>> {
    let m = p.meetings;
    let mut shared = vec![0usize; m * m];
    for _ in 0..p.persons {
        let mut picked = sample(rng, m, p.meetings_per_person).into_vec();
        picked.sort_unstable();
        for (x, &a) in picked.iter().enumerate() {
            for &b in &picked[x + 1..] {
                shared[a * m + b] += 1;
            }
        }
    }
    let mut edges = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let s = shared[a * m + b];
            if s == 0 {
                continue;
            }
            let travel = rng.gen_range(p.travel_lo..=p.travel_hi);
            let costs = (0..p.slots * p.slots).map(|k| meeting_cost(s, travel, k / p.slots, k % p.slots) as f64).collect();
            edges.push(RawEdge { i: a, j: b, costs });
        }
    }
    edges
}
