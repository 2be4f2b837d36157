use serde::{Deserialize, Serialize};

use crate::engine::{Agent, AgentError, AgentFactory, PhasePlan, RoundMessage, StepContext};
use crate::problem::Problem;
use crate::response::{beats, best_response, read_assignments, read_gains, BestResponse};
use crate::scalar::Scalar;

use super::{increase_mod, is_violated_adaptive, CostModifier, Manner, PenaltySets, Scope};

/// A DGLS variant: penalty manner, evaporation rate and update scope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DglsConfig {
    pub manner: Manner,
    pub gamma: f64,
    pub scope: Scope,
    /// Decay only the modifiers being penalized in the current round.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub evaporate_on_qlm_only: bool,
}

impl DglsConfig {
    pub fn new(manner: Manner, gamma: f64, scope: Scope) -> Self {
        Self { manner, gamma, scope, evaporate_on_qlm_only: false }
    }

    pub fn is_valid(&self) -> bool {
        self.gamma > 0.0 && self.gamma < 1.0
    }
}

const PHASES: [&str; 3] = ["gains", "sync", "assignments"];

impl<S: Scalar> AgentFactory<S> for DglsConfig {
    fn phase_plan(&self) -> PhasePlan {
        PhasePlan::new(PHASES.to_vec())
    }

    fn spawn(&self, problem: &Problem<S>, agent: usize, initial_value: usize) -> Box<dyn Agent<S>> {
        Box::new(DglsAgent::new(problem, agent, initial_value, *self))
    }
}

/// One agent of a DGLS run.
///
/// Phase `gains`: read neighbor values, compute the best response under effective
/// costs and announce the gain. Phase `sync`: move if this agent holds the best
/// improvement in its neighborhood; in a quasi-local minimum flag violated
/// constraints with the adaptive rule and send SYNC to each flagged neighbor.
/// Phase `assignments`: collect SYNCs, evaporate and update every modifier, then
/// broadcast the value.
#[derive(Debug, Clone)]
pub struct DglsAgent<S> {
    id: usize,
    config: DglsConfig,
    gamma: S,
    value: usize,
    neighbor_values: Vec<usize>,
    neighbor_gains: Vec<S>,
    modifiers: Vec<CostModifier<S>>,
    sets: PenaltySets,
    response: BestResponse<S>,
}

impl<S: Scalar> DglsAgent<S> {
    pub fn new(problem: &Problem<S>, id: usize, value: usize, config: DglsConfig) -> Self {
        let degree = problem.degree(id);
        Self {
            id,
            config,
            gamma: S::lit(config.gamma),
            value,
            neighbor_values: vec![0; degree],
            neighbor_gains: vec![S::zero(); degree],
            modifiers: zero_modifiers(problem, id),
            sets: PenaltySets::new(degree),
            response: BestResponse { value, gain: S::zero() },
        }
    }

    pub fn penalty_sets(&self) -> &PenaltySets {
        &self.sets
    }

    fn announce_gain(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        read_assignments(ctx, &mut self.neighbor_values)?;
        self.sets.clear();
        self.response = best_response(
            ctx.problem,
            self.id,
            self.value,
            &self.neighbor_values,
            Some((&self.modifiers, self.config.manner)),
        );
        ctx.broadcast(RoundMessage::Gain(self.response.gain));
        Ok(())
    }

    fn decide(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        read_gains(ctx, &mut self.neighbor_gains)?;
        let gain = self.response.gain;
        let incs = ctx.problem.neighbors(self.id);
        if gain > S::zero() {
            let best = incs.iter().zip(&self.neighbor_gains).all(|(inc, &g)| beats(gain, self.id, g, inc.neighbor));
            if best {
                self.value = self.response.value;
            }
        } else if self.neighbor_gains.iter().all(|&g| g <= S::zero()) {
            for (k, inc) in incs.iter().enumerate() {
                let table = ctx.problem.table(inc);
                if is_violated_adaptive(table, inc.self_is_row, self.value, self.neighbor_values[k], ctx.rng) {
                    self.sets.self_penalized[k] = true;
                    ctx.send(inc.neighbor, RoundMessage::Sync(self.id));
                }
            }
        }
        Ok(())
    }

    fn update_and_broadcast(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        for env in ctx.inbox {
            match (&env.message, ctx.problem.incidence_index(self.id, env.from)) {
                (RoundMessage::Sync(sender), Some(k)) if *sender == env.from => self.sets.neighbor_penalized[k] = true,
                (msg, _) => {
                    return Err(AgentError::UnexpectedMessage { agent: self.id, from: env.from, kind: msg.kind(), round: ctx.round })
                }
            }
        }
        for (k, modifier) in self.modifiers.iter_mut().enumerate() {
            if !self.config.evaporate_on_qlm_only || self.sets.touched(k) {
                modifier.evaporate(self.gamma);
            }
            increase_mod(
                modifier,
                self.config.scope,
                self.value,
                self.neighbor_values[k],
                self.sets.self_penalized[k],
                self.sets.neighbor_penalized[k],
            );
        }
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }
}

pub(crate) fn zero_modifiers<S: Scalar>(problem: &Problem<S>, agent: usize) -> Vec<CostModifier<S>> {
    problem
        .neighbors(agent)
        .iter()
        .map(|inc| {
            let t = problem.table(inc);
            CostModifier::zeros(t.self_size(inc.self_is_row), t.other_size(inc.self_is_row))
        })
        .collect()
}

impl<S: Scalar> Agent<S> for DglsAgent<S> {
    fn init(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn step(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        match ctx.phase {
            0 => self.announce_gain(ctx),
            1 => self.decide(ctx),
            _ => self.update_and_broadcast(ctx),
        }
    }

    fn value(&self) -> usize {
        self.value
    }

    fn modifiers(&self) -> Option<&[CostModifier<S>]> {
        Some(&self.modifiers)
    }
}
