//! Best-response computation shared by every local-search agent, plus the
//! neighbor bookkeeping those agents need.

use crate::engine::{AgentError, RoundMessage, StepContext};
use crate::gls::{CostModifier, Manner};
use crate::problem::Problem;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse<S> {
    pub value: usize,
    /// Cost decrease of switching from the current value to `value`; never negative.
    pub gain: S,
}

/// Local cost of every candidate value, split into the base part and the penalty part.
///
/// Keeping the two sums apart makes differences between candidates exact whenever
/// the penalty part is the same for both, which is what lets table-scope additive
/// penalties reproduce plain base-cost decisions bit for bit.
pub(crate) fn local_cost_parts<S: Scalar>(
    problem: &Problem<S>,
    agent: usize,
    neighbor_values: &[usize],
    penalties: Option<(&[CostModifier<S>], Manner)>,
) -> (Vec<S>, Vec<S>) {
    let size = problem.domain(agent).size();
    let mut base = vec![S::zero(); size];
    let mut extra = vec![S::zero(); size];
    for (k, inc) in problem.neighbors(agent).iter().enumerate() {
        let table = problem.table(inc);
        let d_other = neighbor_values[k];
        for d in 0..size {
            let f = table.oriented(inc.self_is_row, d, d_other);
            base[d] += f;
            if let Some((mods, manner)) = penalties {
                let m = mods[k].get(d, d_other);
                extra[d] += match manner {
                    Manner::Additive => m,
                    Manner::Multiplicative => f * m,
                };
            }
        }
    }
    (base, extra)
}

/// Best value against fixed neighbor values, optionally under penalized (effective) costs.
///
/// The current value is kept on ties; otherwise the smallest minimizing index wins.
pub fn best_response<S: Scalar>(
    problem: &Problem<S>,
    agent: usize,
    current: usize,
    neighbor_values: &[usize],
    penalties: Option<(&[CostModifier<S>], Manner)>,
) -> BestResponse<S> {
    let (base, extra) = local_cost_parts(problem, agent, neighbor_values, penalties);
    let improvement = |from: usize, to: usize| (base[from] - base[to]) + (extra[from] - extra[to]);
    let mut best = current;
    for d in 0..base.len() {
        if d != best && improvement(best, d) > S::zero() {
            best = d;
        }
    }
    let gain = improvement(current, best);
    if gain > S::zero() {
        BestResponse { value: best, gain }
    } else {
        BestResponse { value: current, gain: S::zero() }
    }
}

/// Strict "best improvement" order: larger gain wins, equal gains go to the lower index.
#[inline]
pub fn beats<S: Scalar>(gain: S, id: usize, other_gain: S, other_id: usize) -> bool {
    gain > other_gain || (gain == other_gain && id < other_id)
}

/// Neighbor values indexed like the agent's incidence list.
pub(crate) fn read_assignments<S: Scalar>(ctx: &StepContext<'_, S>, out: &mut [usize]) -> Result<(), AgentError> {
    read_each(ctx, "assignment", |k, msg| match *msg {
        RoundMessage::Assignment(v) => {
            out[k] = v;
            true
        }
        _ => false,
    })
}

pub(crate) fn read_gains<S: Scalar>(ctx: &StepContext<'_, S>, out: &mut [S]) -> Result<(), AgentError> {
    read_each(ctx, "gain", |k, msg| match *msg {
        RoundMessage::Gain(g) => {
            out[k] = g;
            true
        }
        _ => false,
    })
}

/// Requires exactly one message of `kind` from every neighbor.
fn read_each<S: Scalar>(
    ctx: &StepContext<'_, S>,
    kind: &'static str,
    mut accept: impl FnMut(usize, &RoundMessage<S>) -> bool,
) -> Result<(), AgentError> {
    let incs = ctx.problem.neighbors(ctx.agent);
    let mut next = 0;
    for env in ctx.inbox {
        let expected = incs.get(next).map(|inc| inc.neighbor);
        if expected != Some(env.from) || !accept(next, &env.message) {
            return Err(unexpected(ctx, env.from, env.message.kind(), expected, kind));
        }
        next += 1;
    }
    match incs.get(next) {
        Some(inc) => Err(AgentError::MissingMessage { agent: ctx.agent, from: inc.neighbor, kind, round: ctx.round }),
        None => Ok(()),
    }
}

fn unexpected<S: Scalar>(
    ctx: &StepContext<'_, S>,
    from: usize,
    got: &'static str,
    expected: Option<usize>,
    kind: &'static str,
) -> AgentError {
    match expected {
        Some(e) if e < from => AgentError::MissingMessage { agent: ctx.agent, from: e, kind, round: ctx.round },
        _ => AgentError::UnexpectedMessage { agent: ctx.agent, from, kind: got, round: ctx.round },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ProblemParts, RawEdge};

    fn one_edge(costs: Vec<f64>) -> Problem<f64> {
        Problem::new(ProblemParts { domains: vec![2, 2], edges: vec![RawEdge { i: 0, j: 1, costs }] }).unwrap()
    }

    #[test]
    fn enumerated_best_response() {
        // neighbor at 0: column 0 is [3, 0]
        let p = one_edge(vec![3.0, 1.0, 0.0, 2.0]);
        let br = best_response(&p, 0, 0, &[0], None);
        assert_eq!(br, BestResponse { value: 1, gain: 3.0 });
        let zero = vec![CostModifier::zeros(2, 2)];
        assert_eq!(best_response(&p, 0, 0, &[0], Some((&zero, Manner::Additive))), br);
        assert_eq!(best_response(&p, 0, 0, &[0], Some((&zero, Manner::Multiplicative))), br);
    }

    #[test]
    fn optimal_current_value_is_kept() {
        let p = one_edge(vec![1.0, 1.0, 1.0, 1.0]);
        assert_eq!(best_response(&p, 0, 1, &[0], None), BestResponse { value: 1, gain: 0.0 });
        // column-side agent sees the transposed table
        let p = one_edge(vec![5.0, 2.0, 5.0, 9.0]);
        assert_eq!(best_response(&p, 1, 0, &[0], None), BestResponse { value: 1, gain: 3.0 });
    }

    #[test]
    fn ties_go_to_the_smallest_index() {
        let p = Problem::new(ProblemParts { domains: vec![3, 1], edges: vec![RawEdge { i: 0, j: 1, costs: vec![4.0, 1.0, 1.0] }] }).unwrap();
        assert_eq!(best_response(&p, 0, 0, &[0], None).value, 1);
    }

    #[test]
    fn penalties_shift_the_response() {
        let p = one_edge(vec![3.0, 1.0, 0.0, 2.0]);
        let mut m = CostModifier::zeros(2, 2);
        m.add_cell(1, 0, 4.0);
        let mods = vec![m];
        // additive: 3 vs 0 + 4 -> stay
        assert_eq!(best_response(&p, 0, 0, &[0], Some((&mods, Manner::Additive))).gain, 0.0);
        // multiplicative: 0 * (1 + 4) = 0 -> still move
        assert_eq!(best_response(&p, 0, 0, &[0], Some((&mods, Manner::Multiplicative))).value, 1);
    }

    #[test]
    fn tie_break_order() {
        assert!(beats(2.0, 5, 1.0, 0));
        assert!(beats(2.0, 1, 2.0, 3));
        assert!(!beats(2.0, 3, 2.0, 1));
        assert!(!beats(1.0, 0, 2.0, 9));
    }
}
