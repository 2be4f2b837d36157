use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{Agent, AgentError, AgentFactory, PhasePlan, RoundMessage, StepContext};
use crate::problem::Problem;
use crate::response::{beats, best_response, read_assignments, read_gains, BestResponse};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mgm2Config {
    /// Probability that an agent acts as offerer in a round.
    #[serde(default = "default_offer_p")]
    pub offer_p: f64,
}

fn default_offer_p() -> f64 {
    0.5
}

impl Default for Mgm2Config {
    fn default() -> Self {
        Self { offer_p: default_offer_p() }
    }
}

impl Mgm2Config {
    pub fn is_valid(&self) -> bool {
        (0.0..=1.0).contains(&self.offer_p)
    }
}

impl<S: Scalar> AgentFactory<S> for Mgm2Config {
    fn phase_plan(&self) -> PhasePlan {
        PhasePlan::new(vec!["offers", "replies", "gains", "commits", "assignments"])
    }

    fn spawn(&self, problem: &Problem<S>, agent: usize, initial_value: usize) -> Box<dyn Agent<S>> {
        let degree = problem.degree(agent);
        Box::new(Mgm2Agent {
            id: agent,
            offer_p: self.offer_p,
            value: initial_value,
            neighbor_values: vec![0; degree],
            neighbor_gains: vec![S::zero(); degree],
            unilateral: BestResponse { value: initial_value, gain: S::zero() },
            offered_to: None,
            pair: None,
            go: false,
        })
    }
}

/// Joint move agreed with one neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Pair<S> {
    /// Partner's position in the incidence list.
    slot: usize,
    new_value: usize,
    gain: S,
}

/// Coordinated 2-opt agent.
///
/// Phases: `offers` (random offerers propose to one neighbor, sending their local
/// costs without the shared constraint), `replies` (receivers pick the best
/// positive joint move and accept it), `gains` (announce joint or unilateral
/// gain), `commits` (partners tell each other whether they won their
/// neighborhood), `assignments` (committed pairs and winning singles move).
#[derive(Debug, Clone)]
pub struct Mgm2Agent<S> {
    id: usize,
    offer_p: f64,
    value: usize,
    neighbor_values: Vec<usize>,
    neighbor_gains: Vec<S>,
    unilateral: BestResponse<S>,
    offered_to: Option<usize>,
    pair: Option<Pair<S>>,
    go: bool,
}

impl<S: Scalar> Mgm2Agent<S> {
    /// Local cost of each own value, leaving out the constraint at incidence `slot`.
    fn costs_without(&self, problem: &Problem<S>, slot: usize) -> Vec<S> {
        let mut costs = vec![S::zero(); problem.domain(self.id).size()];
        for (k, inc) in problem.neighbors(self.id).iter().enumerate() {
            if k == slot {
                continue;
            }
            let table = problem.table(inc);
            for (d, c) in costs.iter_mut().enumerate() {
                *c += table.oriented(inc.self_is_row, d, self.neighbor_values[k]);
            }
        }
        costs
    }

    fn offer(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        read_assignments(ctx, &mut self.neighbor_values)?;
        self.unilateral = best_response(ctx.problem, self.id, self.value, &self.neighbor_values, None);
        self.offered_to = None;
        self.pair = None;
        self.go = false;
        let degree = self.neighbor_values.len();
        if degree > 0 && ctx.rng.gen::<f64>() < self.offer_p {
            let slot = ctx.rng.gen_range(0..degree);
            let costs = self.costs_without(ctx.problem, slot);
            self.offered_to = Some(slot);
            ctx.send(ctx.problem.neighbors(self.id)[slot].neighbor, RoundMessage::Payload(costs));
        }
        Ok(())
    }

    fn reply(&mut self, ctx: &mut StepContext<'_, S>) {
        if self.offered_to.is_some() {
            return;
        }
        let mut best: Option<(Pair<S>, usize)> = None;
        for env in ctx.inbox {
            let (RoundMessage::Payload(their), Some(slot)) = (&env.message, ctx.problem.incidence_index(self.id, env.from)) else {
                continue;
            };
            let inc = ctx.problem.neighbors(self.id)[slot];
            let table = ctx.problem.table(&inc);
            if their.len() != table.other_size(inc.self_is_row) {
                continue;
            }
            let mine = self.costs_without(ctx.problem, slot);
            let joint = |b: usize, a: usize| their[a] + mine[b] + table.oriented(inc.self_is_row, b, a);
            let current = joint(self.value, self.neighbor_values[slot]);
            let mut choice = (self.value, self.neighbor_values[slot]);
            let mut choice_cost = current;
            for b in 0..mine.len() {
                for a in 0..their.len() {
                    let c = joint(b, a);
                    if c < choice_cost {
                        choice = (b, a);
                        choice_cost = c;
                    }
                }
            }
            let gain = current - choice_cost;
            if gain > S::zero() && best.as_ref().map_or(true, |(p, _)| gain > p.gain) {
                best = Some((Pair { slot, new_value: choice.0, gain }, choice.1));
            }
        }
        if let Some((pair, partner_value)) = best {
            self.pair = Some(pair);
            let to = ctx.problem.neighbors(self.id)[pair.slot].neighbor;
            ctx.send(to, RoundMessage::Payload(vec![pair.gain, S::lit(partner_value as f64)]));
        }
    }

    fn announce(&mut self, ctx: &mut StepContext<'_, S>) {
        if let Some(slot) = self.offered_to {
            let partner = ctx.problem.neighbors(self.id)[slot].neighbor;
            let accepted = ctx.inbox.iter().find_map(|env| match &env.message {
                RoundMessage::Payload(v) if env.from == partner && v.len() == 2 => Some((v[0], v[1])),
                _ => None,
            });
            if let Some((gain, value)) = accepted {
                let new_value = value.to_usize().filter(|&v| v < ctx.problem.domain(self.id).size());
                if let Some(new_value) = new_value {
                    self.pair = Some(Pair { slot, new_value, gain });
                }
            }
        }
        let gain = self.pair.map_or(self.unilateral.gain, |p| p.gain);
        ctx.broadcast(RoundMessage::Gain(gain));
    }

    fn commit(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        read_gains(ctx, &mut self.neighbor_gains)?;
        let skip = self.pair.map(|p| p.slot);
        let gain = self.pair.map_or(self.unilateral.gain, |p| p.gain);
        let incs = ctx.problem.neighbors(self.id);
        self.go = gain > S::zero()
            && incs
                .iter()
                .zip(&self.neighbor_gains)
                .enumerate()
                .all(|(k, (inc, &g))| Some(k) == skip || beats(gain, self.id, g, inc.neighbor));
        if let Some(p) = self.pair {
            let flag = if self.go { S::one() } else { S::zero() };
            ctx.send(incs[p.slot].neighbor, RoundMessage::Payload(vec![flag]));
        }
        Ok(())
    }

    fn assign(&mut self, ctx: &mut StepContext<'_, S>) {
        match self.pair {
            Some(p) => {
                let partner = ctx.problem.neighbors(self.id)[p.slot].neighbor;
                let partner_go = ctx.inbox.iter().any(|env| {
                    env.from == partner && matches!(&env.message, RoundMessage::Payload(v) if v.len() == 1 && v[0] == S::one())
                });
                if self.go && partner_go {
                    self.value = p.new_value;
                }
            }
            None => {
                if self.go {
                    self.value = self.unilateral.value;
                }
            }
        }
        ctx.broadcast(RoundMessage::Assignment(self.value));
    }
}

impl<S: Scalar> Agent<S> for Mgm2Agent<S> {
    fn init(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        ctx.broadcast(RoundMessage::Assignment(self.value));
        Ok(())
    }

    fn step(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        match ctx.phase {
            0 => self.offer(ctx)?,
            1 => self.reply(ctx),
            2 => self.announce(ctx),
            3 => self.commit(ctx)?,
            _ => self.assign(ctx),
        }
        Ok(())
    }

    fn value(&self) -> usize {
        self.value
    }
}
