use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Agent, AgentError, AgentFactory, PhasePlan, RoundMessage, StepContext};
use crate::problem::Problem;
use crate::response::{best_response, local_cost_parts, read_assignments};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DsaConfig {
    /// Probability of taking an improving move.
    pub p: f64,
    /// Also take zero-gain moves to a different value (DSA-B style).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_sideways: bool,
}

impl DsaConfig {
    pub fn new(p: f64) -> Self {
        Self { p, allow_sideways: false }
    }

    pub fn is_valid(&self) -> bool {
        self.p > 0.0 && self.p <= 1.0
    }
}

impl<S: Scalar> AgentFactory<S> for DsaConfig {
    fn phase_plan(&self) -> PhasePlan {
        PhasePlan::new(vec!["assignments"])
    }

    fn spawn(&self, problem: &Problem<S>, agent: usize, initial_value: usize) -> Box<dyn Agent<S>> {
        Box::new(DsaAgent { id: agent, config: *self, value: initial_value, neighbor_values: vec![0; problem.degree(agent)] })
    }
}

#[derive(Debug, Clone)]
pub struct DsaAgent {
    id: usize,
    config: DsaConfig,
    value: usize,
    neighbor_values: Vec<usize>,
}

impl<S: Scalar> Agent<S> for DsaAgent {
    fn init(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn step(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        read_assignments(ctx, &mut self.neighbor_values)?;
        let br = best_response(ctx.problem, self.id, self.value, &self.neighbor_values, None);
        if br.gain > S::zero() {
            if ctx.rng.gen::<f64>() < self.config.p {
                self.value = br.value;
            }
        } else if self.config.allow_sideways {
            let (base, _) = local_cost_parts::<S>(ctx.problem, self.id, &self.neighbor_values, None);
            let current = base[self.value];
            let sideways: Vec<usize> = (0..base.len()).filter(|&d| d != self.value && base[d] == current).collect();
            if !sideways.is_empty() && ctx.rng.gen::<f64>() < self.config.p {
                self.value = *sideways.choose(ctx.rng).expect("nonempty");
            }
        }
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn value(&self) -> usize {
        self.value
    }
}
