//! Damped min-sum message passing on the constraint factor graph.
//!
//! Every constraint is a function node hosted by its lower-indexed endpoint.
//! A round has three phases: variables send variable-to-function tables,
//! hosts answer with function-to-variable tables, and variables pick the value
//! with the smallest belief. Every emitted table is shifted so its minimum is
//! exactly zero.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Agent, AgentError, AgentFactory, PhasePlan, RoundMessage, StepContext};
use crate::problem::{ConstraintTable, Problem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampDirection {
    #[default]
    Both,
    VarOnly,
    FuncOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxsumConfig {
    /// Weight of the previous message in the damped update.
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "is_both")]
    pub damp_direction: DampDirection,
    /// Upper bound of the per-variable random unary preferences that break symmetric ties.
    #[serde(default = "default_noise")]
    pub noise: f64,
}

fn is_both(d: &DampDirection) -> bool {
    *d == DampDirection::Both
}

fn default_noise() -> f64 {
    1e-3
}

impl MaxsumConfig {
    pub fn new(lambda: f64) -> Self {
        Self { lambda, damp_direction: DampDirection::Both, noise: default_noise() }
    }

    pub fn is_valid(&self) -> bool {
        (0.0..1.0).contains(&self.lambda) && self.noise >= 0.0 && self.noise.is_finite()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("message length mismatch: {previous} vs {fresh}")]
pub struct ShapeMismatch {
    pub previous: usize,
    pub fresh: usize,
}

/// Shifts `table` so that its smallest entry is zero.
pub fn normalize<S: Scalar>(table: &mut [S]) {
    let min = table.iter().copied().fold(S::infinity(), S::min);
    if min.is_finite() {
        for v in table.iter_mut() {
            *v -= min;
        }
    }
}

/// Entrywise sum of the given function-to-variable tables (the target's own table
/// already left out by the caller), normalized.
pub fn var_to_func<S: Scalar>(size: usize, incoming: &[&[S]]) -> Vec<S> {
    let mut out = vec![S::zero(); size];
    for table in incoming {
        for (o, &v) in out.iter_mut().zip(table.iter()) {
            *o += v;
        }
    }
    normalize(&mut out);
    out
}

/// `out[d] = min_{d'} f(d, d') + incoming[d']`, with `d` indexing the target variable.
pub fn func_to_var<S: Scalar>(table: &ConstraintTable<S>, target_is_row: bool, incoming: &[S]) -> Vec<S> {
    let size = table.self_size(target_is_row);
    let mut out: Vec<S> = (0..size)
        .map(|d| {
            incoming
                .iter()
                .enumerate()
                .map(|(other, &m)| table.oriented(target_is_row, d, other) + m)
                .fold(S::infinity(), S::min)
        })
        .collect();
    normalize(&mut out);
    out
}

/// `lambda * previous + (1 - lambda) * fresh`, normalized.
pub fn damp<S: Scalar>(previous: &[S], fresh: &[S], lambda: S) -> Result<Vec<S>, ShapeMismatch> {
    if previous.len() != fresh.len() {
        return Err(ShapeMismatch { previous: previous.len(), fresh: fresh.len() });
    }
    let keep = S::one() - lambda;
    let mut out: Vec<S> = previous.iter().zip(fresh).map(|(&p, &f)| lambda * p + keep * f).collect();
    normalize(&mut out);
    Ok(out)
}

/// Smallest index of the minimum belief.
pub fn select_value<S: Scalar>(beliefs: &[S]) -> usize {
    let mut best = 0;
    for (d, &b) in beliefs.iter().enumerate().skip(1) {
        if b < beliefs[best] {
            best = d;
        }
    }
    best
}

impl<S: Scalar> AgentFactory<S> for MaxsumConfig {
    fn phase_plan(&self) -> PhasePlan {
        PhasePlan::new(vec!["var_to_func", "func_to_var", "select"])
    }

    fn spawn(&self, problem: &Problem<S>, agent: usize, initial_value: usize) -> Box<dyn Agent<S>> {
        let size = problem.domain(agent).size();
        let incs = problem.neighbors(agent);
        let hosted = incs
            .iter()
            .map(|inc| {
                inc.self_is_row.then(|| {
                    let other = problem.table(inc).other_size(true);
                    HostedFunction {
                        from_remote: vec![S::zero(); other],
                        to_remote_prev: vec![S::zero(); other],
                        to_local_prev: vec![S::zero(); size],
                    }
                })
            })
            .collect();
        Box::new(MaxsumAgent {
            id: agent,
            config: *self,
            value: initial_value,
            unary: Vec::new(),
            f2v: vec![vec![S::zero(); size]; incs.len()],
            v2f_prev: vec![vec![S::zero(); size]; incs.len()],
            v2f_local: vec![Vec::new(); incs.len()],
            hosted,
        })
    }
}

#[derive(Debug, Clone)]
struct HostedFunction<S> {
    from_remote: Vec<S>,
    to_remote_prev: Vec<S>,
    to_local_prev: Vec<S>,
}

/// A variable node plus the function nodes it hosts.
#[derive(Debug, Clone)]
pub struct MaxsumAgent<S> {
    id: usize,
    config: MaxsumConfig,
    value: usize,
    unary: Vec<S>,
    /// Latest function-to-variable table per incidence.
    f2v: Vec<Vec<S>>,
    v2f_prev: Vec<Vec<S>>,
    /// Variable-to-function tables for the functions this agent hosts.
    v2f_local: Vec<Vec<S>>,
    hosted: Vec<Option<HostedFunction<S>>>,
}

impl<S: Scalar> MaxsumAgent<S> {
    fn lambda_for(&self, variable_side: bool) -> S {
        let on = match self.config.damp_direction {
            DampDirection::Both => true,
            DampDirection::VarOnly => variable_side,
            DampDirection::FuncOnly => !variable_side,
        };
        if on {
            S::lit(self.config.lambda)
        } else {
            S::zero()
        }
    }

    fn beliefs(&self) -> Vec<S> {
        let mut b = self.unary.clone();
        for table in &self.f2v {
            for (x, &v) in b.iter_mut().zip(table) {
                *x += v;
            }
        }
        b
    }

    fn send_var_to_func(&mut self, ctx: &mut StepContext<'_, S>) {
        let lambda = self.lambda_for(true);
        let incs = ctx.problem.neighbors(self.id);
        for (k, inc) in incs.iter().enumerate() {
            let mut parts: Vec<&[S]> = Vec::with_capacity(incs.len());
            parts.push(&self.unary);
            parts.extend(self.f2v.iter().enumerate().filter(|&(e, _)| e != k).map(|(_, t)| t.as_slice()));
            let fresh = var_to_func(self.unary.len(), &parts);
            let msg = damp(&self.v2f_prev[k], &fresh, lambda).expect("same domain");
            self.v2f_prev[k] = msg.clone();
            if inc.self_is_row {
                self.v2f_local[k] = msg;
            } else {
                ctx.send(inc.neighbor, RoundMessage::Payload(msg));
            }
        }
    }

    fn send_func_to_var(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        for env in ctx.inbox {
            let slot = ctx.problem.incidence_index(self.id, env.from);
            match (&env.message, slot.and_then(|k| self.hosted[k].as_mut())) {
                (RoundMessage::Payload(v), Some(h)) if v.len() == h.from_remote.len() => h.from_remote.clone_from(v),
                (msg, _) => {
                    return Err(AgentError::UnexpectedMessage { agent: self.id, from: env.from, kind: msg.kind(), round: ctx.round })
                }
            }
        }
        let lambda = self.lambda_for(false);
        for (k, inc) in ctx.problem.neighbors(self.id).iter().enumerate() {
            let Some(h) = self.hosted[k].as_mut() else { continue };
            let table = ctx.problem.table(inc);
            let to_remote = damp(&h.to_remote_prev, &func_to_var(table, false, &self.v2f_local[k]), lambda).expect("same domain");
            let to_local = damp(&h.to_local_prev, &func_to_var(table, true, &h.from_remote), lambda).expect("same domain");
            h.to_remote_prev = to_remote.clone();
            h.to_local_prev = to_local.clone();
            self.f2v[k] = to_local;
            ctx.send(inc.neighbor, RoundMessage::Payload(to_remote));
        }
        Ok(())
    }

    fn receive_and_select(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        for env in ctx.inbox {
            let slot = ctx.problem.incidence_index(self.id, env.from).filter(|&k| self.hosted[k].is_none());
            match (&env.message, slot) {
                (RoundMessage::Payload(v), Some(k)) if v.len() == self.f2v[k].len() => self.f2v[k].clone_from(v),
                (msg, _) => {
                    return Err(AgentError::UnexpectedMessage { agent: self.id, from: env.from, kind: msg.kind(), round: ctx.round })
                }
            }
        }
        self.value = select_value(&self.beliefs());
        Ok(())
    }
}

impl<S: Scalar> Agent<S> for MaxsumAgent<S> {
    fn init(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        let size = ctx.problem.domain(self.id).size();
        let noise = self.config.noise;
        self.unary = (0..size)
            .map(|_| if noise > 0.0 { S::lit(ctx.rng.gen::<f64>() * noise) } else { S::zero() })
            .collect();
        Ok(())
    }

    fn step(&mut self, ctx: &mut StepContext<'_, S>) -> Result<(), AgentError> {
        match ctx.phase {
            0 => {
                self.send_var_to_func(ctx);
                Ok(())
            }
            1 => self.send_func_to_var(ctx),
            _ => self.receive_and_select(ctx),
        }
    }

    fn value(&self) -> usize {
        self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variable_messages() {
        assert_eq!(var_to_func::<f64>(3, &[]), vec![0.0; 3]);
        assert_eq!(var_to_func(2, &[&[0.0, 2.0], &[1.0, 0.0]]), vec![0.0, 1.0]);
    }

    #[test]
    fn variable_message_is_belief_minus_target() {
        let tables: [&[f64]; 3] = [&[0.0, 2.0, 5.0], &[1.0, 0.0, 3.0], &[4.0, 4.0, 0.0]];
        let belief = var_to_func(3, &tables);
        let minus_last = var_to_func(3, &tables[..2]);
        let mut expected: Vec<f64> = (0..3).map(|d| tables[0][d] + tables[1][d]).collect();
        normalize(&mut expected);
        assert_eq!(minus_last, expected);
        assert_ne!(belief, minus_last);
    }

    #[test]
    fn function_messages() {
        let anti = ConstraintTable::new(2, 2, vec![0.0, 5.0, 5.0, 0.0]).unwrap();
        assert_eq!(func_to_var(&anti, true, &[0.0, 0.0]), vec![0.0, 0.0]);
        let t = ConstraintTable::new(2, 2, vec![3.0, 1.0, 0.0, 2.0]).unwrap();
        assert_eq!(func_to_var(&t, true, &[0.0, 0.0]), vec![1.0, 0.0]);
        // column variable: column minima are 0 and 1
        assert_eq!(func_to_var(&t, false, &[0.0, 0.0]), vec![0.0, 1.0]);
        let c = ConstraintTable::new(2, 3, vec![7.0; 6]).unwrap();
        assert_eq!(func_to_var(&c, false, &[1.0, 0.0]), vec![0.0; 3]);
    }

    #[test]
    fn damping() {
        assert_eq!(damp(&[3.0, 1.0], &[2.0, 0.0], 0.0).unwrap(), vec![2.0, 0.0]);
        assert_eq!(damp(&[0.0, 4.0], &[2.0, 0.0], 0.5).unwrap(), vec![0.0, 1.0]);
        assert_eq!(damp(&[0.0, 3.0], &[0.0, 3.0], 0.9).unwrap(), vec![0.0, 3.0]);
        assert!(damp(&[0.0], &[0.0, 1.0], 0.5).is_err());
    }

    #[test]
    fn value_selection() {
        assert_eq!(select_value(&[0.0, 0.0, 0.0]), 0);
        assert_eq!(select_value(&[3.0, 1.0, 2.0]), 1);
    }

    #[test]
    fn config_validation() {
        assert!(MaxsumConfig::new(0.0).is_valid());
        assert!(MaxsumConfig::new(0.9).is_valid());
        assert!(!MaxsumConfig::new(1.0).is_valid());
        assert!(!MaxsumConfig::new(-0.1).is_valid());
    }
}
