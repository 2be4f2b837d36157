use serde::{Deserialize, Serialize};

use crate::engine::{Agent, AgentError, AgentFactory, PhasePlan, RoundMessage, StepContext};
use crate::problem::Problem;
use crate::response::{beats, best_response, read_assignments, read_gains, BestResponse};
use crate::scalar::Scalar;

use super::dgls::zero_modifiers;
use super::{increase_unilateral, is_violated_fixed, CostModifier, Manner, Scope, ViolationRule};

/// A GDBA variant, e.g. `(M, NM, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GdbaConfig {
    pub manner: Manner,
    pub violation: ViolationRule,
    pub scope: Scope,
}

impl GdbaConfig {
    pub fn new(manner: Manner, violation: ViolationRule, scope: Scope) -> Self {
        Self { manner, violation, scope }
    }

    pub fn is_valid(&self) -> bool {
        self.violation != ViolationRule::Adaptive
    }
}

impl<S: Scalar> AgentFactory<S> for GdbaConfig {
    fn phase_plan(&self) -> PhasePlan {
        PhasePlan::new(vec!["gains", "assignments"])
    }

    fn spawn(&self, problem: &Problem<S>, agent: usize, initial_value: usize) -> Box<dyn Agent<S>> {
        Box::new(GdbaAgent::new(problem, agent, initial_value, *self))
    }
}

/// One agent of a GDBA run: effective-cost best response, fixed violation rule,
/// no evaporation, and penalties raised independently on the agent's own copy.
#[derive(Debug, Clone)]
pub struct GdbaAgent<S> {
    id: usize,
    config: GdbaConfig,
    value: usize,
    neighbor_values: Vec<usize>,
    neighbor_gains: Vec<S>,
    modifiers: Vec<CostModifier<S>>,
    response: BestResponse<S>,
}

impl<S: Scalar> GdbaAgent<S> {
    pub fn new(problem: &Problem<S>, id: usize, value: usize, config: GdbaConfig) -> Self {
        assert!(config.is_valid(), "GDBA needs a fixed violation rule");
        let degree = problem.degree(id);
        Self {
            id,
            config,
            value,
            neighbor_values: vec![0; degree],
            neighbor_gains: vec![S::zero(); degree],
            modifiers: zero_modifiers(problem, id),
            response: BestResponse { value, gain: S::zero() },
        }
    }
}

impl<S: Scalar> Agent<S> for GdbaAgent<S> {
    fn init(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn step(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        if ctx.phase == 0 {
            read_assignments(ctx, &mut self.neighbor_values)?;
            self.response = best_response(
                ctx.problem,
                self.id,
                self.value,
                &self.neighbor_values,
                Some((&self.modifiers, self.config.manner)),
            );
            ctx.broadcast(RoundMessage::Gain(self.response.gain));
            return Ok(());
        }
        read_gains(ctx, &mut self.neighbor_gains)?;
        let gain = self.response.gain;
        let incs = ctx.problem.neighbors(self.id);
        if gain > S::zero() {
            if incs.iter().zip(&self.neighbor_gains).all(|(inc, &g)| beats(gain, self.id, g, inc.neighbor)) {
                self.value = self.response.value;
            }
        } else if self.neighbor_gains.iter().all(|&g| g <= S::zero()) {
            for (k, inc) in incs.iter().enumerate() {
                let d_other = self.neighbor_values[k];
                let violated = is_violated_fixed(self.config.violation, ctx.problem.table(inc), inc.self_is_row, self.value, d_other)
                    .unwrap_or(false);
                if violated {
                    increase_unilateral(&mut self.modifiers[k], self.config.scope, self.value, d_other);
                }
            }
        }
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn value(&self) -> usize {
        self.value
    }

    fn modifiers(&self) -> Option<&[CostModifier<S>]> {
        Some(&self.modifiers)
    }
}
