//! Bulk-synchronous round simulator.
//!
//! A round is a fixed sequence of phases. In every phase each agent reads the
//! messages delivered to it by the previous phase, updates its state and fills
//! an outbox; the engine then validates and delivers all outboxes at once. The
//! last phase of a round delivers into the first phase of the next round, so
//! the end-of-round assignment broadcast is what agents see when a round
//! starts. Inboxes are ordered by sender index, and every agent draws from its
//! own random stream, which makes a run a pure function of its inputs whether
//! agents are stepped sequentially or in parallel.

mod message;
pub mod rng;
mod stats;
mod trace;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use message::{Envelope, RoundMessage};
pub use rng::{split, AgentRng, RngPolicy};
pub use stats::{penalty_stats, PenaltyStats};
pub use trace::{AnytimeTrace, RoundRecord, TRACE_CSV_HEADER};

use crate::gls::CostModifier;
use crate::problem::{Problem, ProblemError};
use crate::scalar::Scalar;

/// Ordered phase names of one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhasePlan {
    phases: Vec<&'static str>,
}

impl PhasePlan {
    pub fn new(phases: Vec<&'static str>) -> Self {
        assert!(!phases.is_empty(), "a round needs at least one phase");
        Self { phases }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn name(&self, phase: usize) -> &'static str {
        self.phases[phase]
    }

    pub fn names(&self) -> &[&'static str] {
        &self.phases
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AgentError {
    #[error("agent {agent} expected a {kind} message from neighbor {from} in round {round}")]
    MissingMessage { agent: usize, from: usize, kind: &'static str, round: usize },
    #[error("agent {agent} received an unexpected {kind} message from {from} in round {round}")]
    UnexpectedMessage { agent: usize, from: usize, kind: &'static str, round: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("round {round} phase {phase}: agent {from} sent a message to non-neighbor {to}")]
    NotNeighbor { round: usize, phase: usize, from: usize, to: usize },
    #[error("round {round} phase {phase}: agent {from} sent more than one message to {to}")]
    PhaseOverrun { round: usize, phase: usize, from: usize, to: usize },
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("protocol violation: {0}")]
    Protocol(#[from] ProtocolError),
    #[error("protocol violation: {0}")]
    Agent(#[from] AgentError),
    #[error("invalid initial assignment: {0}")]
    Initial(#[from] ProblemError),
    #[error("a run needs at least one round")]
    NoRounds,
}

/// Everything an agent may touch while executing one phase.
pub struct StepContext<'a, S> {
    pub problem: &'a Problem<S>,
    pub agent: usize,
    pub round: usize,
    pub phase: usize,
    /// Messages delivered by the previous phase, sorted by sender.
    pub inbox: &'a [Envelope<S>],
    pub rng: &'a mut AgentRng,
    outbox: &'a mut Vec<Envelope<S>>,
}

impl<S: Scalar> StepContext<'_, S> {
    pub fn send(&mut self, to: usize, message: RoundMessage<S>) {
        self.outbox.push(Envelope { from: self.agent, to, round: self.round, phase: self.phase, message });
    }

    /// Sends a copy of `message` to every neighbor.
    pub fn broadcast(&mut self, message: RoundMessage<S>) {
        let problem = self.problem;
        for inc in problem.neighbors(self.agent) {
            self.send(inc.neighbor, message.clone());
        }
    }
}

/// Per-agent state machine driven by the engine.
pub trait Agent<S: Scalar>: Send {
    /// Runs before round 1. Messages sent here are delivered to phase 0 of round 1.
    fn init(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError>;

    /// Executes phase `ctx.phase` of round `ctx.round`.
    fn step(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError>;

    /// Current value of the agent's variable.
    fn value(&self) -> usize;

    /// Penalty matrices, aligned with the agent's incidence list, for algorithms that keep them.
    fn modifiers(&self) -> Option<&[CostModifier<S>]> {
        None
    }
}

/// Builds the agents of one algorithm configuration.
pub trait AgentFactory<S: Scalar>: Sync {
    fn phase_plan(&self) -> PhasePlan;

    fn spawn(&self, problem: &Problem<S>, agent: usize, initial_value: usize) -> Box<dyn Agent<S>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub rounds: usize,
    pub seed: u64,
    pub collect_penalties: bool,
    pub collect_messages: bool,
    pub record_assignments: bool,
    /// Starting assignment; drawn uniformly from each agent's stream when absent.
    pub initial: Option<Vec<usize>>,
    pub parallel_agents: bool,
}

impl RunOptions {
    pub fn new(rounds: usize, seed: u64) -> Self {
        Self {
            rounds,
            seed,
            collect_penalties: false,
            collect_messages: false,
            record_assignments: false,
            initial: None,
            parallel_agents: false,
        }
    }

    pub fn penalties(mut self, on: bool) -> Self {
        self.collect_penalties = on;
        self
    }

    pub fn messages(mut self, on: bool) -> Self {
        self.collect_messages = on;
        self
    }

    pub fn assignments(mut self, on: bool) -> Self {
        self.record_assignments = on;
        self
    }

    pub fn initial(mut self, values: Vec<usize>) -> Self {
        self.initial = Some(values);
        self
    }

    pub fn parallel(mut self, on: bool) -> Self {
        self.parallel_agents = on;
        self
    }
}

/// Read-only view handed to observers at the end of every round (round 0 included).
pub struct RoundView<'a, S: Scalar> {
    pub round: usize,
    pub values: &'a [usize],
    slots: &'a [Slot<S>],
}

impl<'a, S: Scalar> RoundView<'a, S> {
    pub fn agent(&self, index: usize) -> &'a dyn Agent<S> {
        self.slots[index].agent.as_ref()
    }

    pub fn n_agents(&self) -> usize {
        self.slots.len()
    }

    pub fn modifiers(&self, index: usize) -> Option<&'a [CostModifier<S>]> {
        self.slots[index].agent.modifiers()
    }
}

struct Slot<S: Scalar> {
    agent: Box<dyn Agent<S>>,
    rng: AgentRng,
    inbox: Vec<Envelope<S>>,
    outbox: Vec<Envelope<S>>,
}

/// Runs `factory`'s algorithm on `problem` for `opts.rounds` rounds.
pub fn run<S: Scalar>(problem: &Problem<S>, factory: &dyn AgentFactory<S>, opts: &RunOptions) -> Result<AnytimeTrace, EngineError> {
    run_observed(problem, factory, opts, |_| {})
}

/// Like [`run`], calling `observer` after initialization and after every round.
pub fn run_observed<S: Scalar>(
    problem: &Problem<S>,
    factory: &dyn AgentFactory<S>,
    opts: &RunOptions,
    mut observer: impl FnMut(&RoundView<'_, S>),
) -> Result<AnytimeTrace, EngineError> {
    if opts.rounds == 0 {
        return Err(EngineError::NoRounds);
    }
    let n = problem.n_agents();
    let plan = factory.phase_plan();
    let policy = RngPolicy::new(opts.seed);
    if let Some(init) = &opts.initial {
        problem.check_assignment(init)?;
    }

    let mut slots: Vec<Slot<S>> = (0..n)
        .map(|i| {
            let mut rng = policy.agent_stream(i);
            let value = match &opts.initial {
                Some(v) => v[i],
                None => rng.gen_range(0..problem.domain(i).size()),
            };
            Slot { agent: factory.spawn(problem, i, value), rng, inbox: Vec::new(), outbox: Vec::new() }
        })
        .collect();

    let last_phase = plan.len() - 1;
    let mut counts = opts.collect_messages.then(|| vec![0u32; n]);
    step_all(problem, &mut slots, 0, last_phase, opts.parallel_agents, true)?;
    exchange(problem, &mut slots, 0, last_phase, counts.as_deref_mut())?;

    let mut values: Vec<usize> = slots.iter().map(|s| s.agent.value()).collect();
    let cost = problem.total_cost_unchecked(&values).as_f64();
    let initial = record(0, cost, cost, &slots, &values, counts.take(), opts);
    observer(&RoundView { round: 0, values: &values, slots: &slots });

    let mut best = cost;
    let mut rounds = Vec::with_capacity(opts.rounds);
    for round in 1..=opts.rounds {
        let mut counts = opts.collect_messages.then(|| vec![0u32; n]);
        for phase in 0..plan.len() {
            step_all(problem, &mut slots, round, phase, opts.parallel_agents, false)?;
            exchange(problem, &mut slots, round, phase, counts.as_deref_mut())?;
        }
        values.clear();
        values.extend(slots.iter().map(|s| s.agent.value()));
        let cost = problem.total_cost_unchecked(&values).as_f64();
        best = best.min(cost);
        rounds.push(record(round, cost, best, &slots, &values, counts, opts));
        observer(&RoundView { round, values: &values, slots: &slots });
    }
    Ok(AnytimeTrace { initial, rounds })
}

fn record<S: Scalar>(
    round: usize,
    current_cost: f64,
    best_so_far: f64,
    slots: &[Slot<S>],
    values: &[usize],
    messages: Option<Vec<u32>>,
    opts: &RunOptions,
) -> RoundRecord {
    let penalty = opts.collect_penalties.then(|| {
        penalty_stats(
            slots
                .iter()
                .filter_map(|s| s.agent.modifiers())
                .flatten()
                .flat_map(|m| m.entries().iter().map(|v| v.as_f64())),
        )
    });
    RoundRecord {
        round,
        current_cost,
        best_so_far,
        penalty,
        messages,
        values: opts.record_assignments.then(|| values.to_vec()),
    }
}

fn step_all<S: Scalar>(
    problem: &Problem<S>,
    slots: &mut [Slot<S>],
    round: usize,
    phase: usize,
    parallel: bool,
    init: bool,
) -> Result<(), AgentError> {
    let run_one = |(agent, slot): (usize, &mut Slot<S>)| {
        let Slot { agent: state, rng, inbox, outbox } = slot;
        let mut ctx = StepContext { problem, agent, round, phase, inbox, rng, outbox };
        if init {
            state.init(&mut ctx)
        } else {
            state.step(&mut ctx)
        }
    };
    let results: Vec<Result<(), AgentError>> = if parallel {
        slots.par_iter_mut().enumerate().map(run_one).collect()
    } else {
        slots.iter_mut().enumerate().map(run_one).collect()
    };
    results.into_iter().collect()
}

/// Delivers every outbox of the current phase. Inboxes end up sorted by sender.
fn exchange<S: Scalar>(
    problem: &Problem<S>,
    slots: &mut [Slot<S>],
    round: usize,
    phase: usize,
    mut counts: Option<&mut [u32]>,
) -> Result<(), ProtocolError> {
    for slot in slots.iter_mut() {
        slot.inbox.clear();
    }
    let mut recipients = Vec::new();
    for from in 0..slots.len() {
        let outbox = std::mem::take(&mut slots[from].outbox);
        recipients.clear();
        recipients.extend(outbox.iter().map(|e| e.to));
        recipients.sort_unstable();
        for pair in recipients.windows(2) {
            if pair[0] == pair[1] {
                return Err(ProtocolError::PhaseOverrun { round, phase, from, to: pair[0] });
            }
        }
        if let Some(&to) = recipients.iter().find(|&&to| !problem.is_neighbor(from, to)) {
            return Err(ProtocolError::NotNeighbor { round, phase, from, to });
        }
        if let Some(c) = counts.as_deref_mut() {
            c[from] += outbox.len() as u32;
        }
        for env in outbox {
            debug_assert_eq!((env.round, env.phase, env.from), (round, phase, from));
            let to = env.to;
            slots[to].inbox.push(env);
        }
    }
    Ok(())
}
