use serde::{Deserialize, Serialize};

use crate::engine::{Agent, AgentError, AgentFactory, PhasePlan, RoundMessage, StepContext};
use crate::problem::Problem;
use crate::response::{beats, best_response, read_assignments, read_gains, BestResponse};
use crate::scalar::Scalar;

/// MGM has no parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MgmConfig {}

impl<S: Scalar> AgentFactory<S> for MgmConfig {
    fn phase_plan(&self) -> PhasePlan {
        PhasePlan::new(vec!["gains", "assignments"])
    }

    fn spawn(&self, problem: &Problem<S>, agent: usize, initial_value: usize) -> Box<dyn Agent<S>> {
        let degree = problem.degree(agent);
        Box::new(MgmAgent {
            id: agent,
            value: initial_value,
            neighbor_values: vec![0; degree],
            neighbor_gains: vec![S::zero(); degree],
            response: BestResponse { value: initial_value, gain: S::zero() },
        })
    }
}

/// Maximum-gain message agent: only the best improver of a neighborhood moves.
#[derive(Debug, Clone)]
pub struct MgmAgent<S> {
    id: usize,
    value: usize,
    neighbor_values: Vec<usize>,
    neighbor_gains: Vec<S>,
    response: BestResponse<S>,
}

impl<S: Scalar> Agent<S> for MgmAgent<S> {
    fn init(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn step(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        if ctx.phase == 0 {
            read_assignments(ctx, &mut self.neighbor_values)?;
            self.response = best_response(ctx.problem, self.id, self.value, &self.neighbor_values, None);
            ctx.broadcast(RoundMessage::Gain(self.response.gain));
            return Ok(());
        }
        read_gains(ctx, &mut self.neighbor_gains)?;
        let gain = self.response.gain;
        let incs = ctx.problem.neighbors(self.id);
        if gain > S::zero() && incs.iter().zip(&self.neighbor_gains).all(|(inc, &g)| beats(gain, self.id, g, inc.neighbor)) {
            self.value = self.response.value;
        }
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn value(&self) -> usize {
        self.value
    }
}
