use rand::Rng;

use crate::engine::AgentRng;
use crate::problem::{ConstraintTable, Problem, ProblemError};
use crate::scalar::Scalar;

use super::{CostModifier, Manner, ViolationRule};

/// Base cost combined with its penalty.
#[inline]
pub fn eff_cost<S: Scalar>(base: S, penalty: S, manner: Manner) -> S {
    match manner {
        Manner::Additive => base + penalty,
        Manner::Multiplicative => base * (penalty + S::one()),
    }
}

/// Effective cost of one incident constraint from the owner's side, bounds-checked.
pub fn effective_lookup<S: Scalar>(
    table: &ConstraintTable<S>,
    self_is_row: bool,
    modifier: &CostModifier<S>,
    d_self: usize,
    d_other: usize,
    manner: Manner,
) -> Result<S, ProblemError> {
    let base = table.oriented_lookup(self_is_row, d_self, d_other)?;
    Ok(eff_cost(base, modifier.get(d_self, d_other), manner))
}

/// Normalized cost `(f - min) / (max - min)`; 0 for a constant table.
pub fn adaptive_probability<S: Scalar>(table: &ConstraintTable<S>, cost: S) -> f64 {
    let span = table.max_cost() - table.min_cost();
    if span <= S::zero() {
        0.0
    } else {
        ((cost - table.min_cost()) / span).as_f64()
    }
}

/// Flags the constraint with probability equal to its normalized cost.
///
/// Always consumes exactly one uniform draw so that the stream position does not
/// depend on the outcome.
pub fn is_violated_adaptive<S: Scalar>(
    table: &ConstraintTable<S>,
    self_is_row: bool,
    d_self: usize,
    d_other: usize,
    rng: &mut AgentRng,
) -> bool {
    let eta = adaptive_probability(table, table.oriented(self_is_row, d_self, d_other));
    let draw: f64 = rng.gen();
    draw < eta
}

/// Deterministic violation test. `None` for [`ViolationRule::Adaptive`], which needs a draw.
pub fn is_violated_fixed<S: Scalar>(
    rule: ViolationRule,
    table: &ConstraintTable<S>,
    self_is_row: bool,
    d_self: usize,
    d_other: usize,
) -> Option<bool> {
    let f = table.oriented(self_is_row, d_self, d_other);
    match rule {
        ViolationRule::Adaptive => None,
        ViolationRule::NonZero => Some(f > S::zero()),
        ViolationRule::NonMinimum => Some(f > table.min_cost()),
        ViolationRule::Maximum => Some(f == table.max_cost()),
    }
}

/// Half the sum, over agents and their incident constraints, of the effective cost
/// each agent sees. `modifiers[i]` is agent `i`'s incidence-aligned modifier list.
pub fn potential<S: Scalar>(problem: &Problem<S>, values: &[usize], modifiers: &[&[CostModifier<S>]], manner: Manner) -> S {
    let mut total = S::zero();
    for (agent, mods) in modifiers.iter().enumerate() {
        for (k, inc) in problem.neighbors(agent).iter().enumerate() {
            let (d_self, d_other) = (values[agent], values[inc.neighbor]);
            let f = problem.table(inc).oriented(inc.self_is_row, d_self, d_other);
            total += eff_cost(f, mods[k].get(d_self, d_other), manner);
        }
    }
    total / S::lit(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::RngPolicy;
    use crate::problem::{ProblemParts, RawEdge};

    #[test]
    fn effective_cost_arithmetic() {
        assert_eq!(eff_cost(5.0, 2.0, Manner::Additive), 7.0);
        assert_eq!(eff_cost(5.0, 2.0, Manner::Multiplicative), 15.0);
        assert_eq!(eff_cost(0.0, 123.0, Manner::Multiplicative), 0.0);
        let t = ConstraintTable::new(1, 2, vec![1.0, 5.0]).unwrap();
        let mut m = CostModifier::zeros(2, 1);
        m.add_cell(1, 0, 2.0);
        assert_eq!(effective_lookup(&t, false, &m, 1, 0, Manner::Additive).unwrap(), 7.0);
        assert!(effective_lookup(&t, false, &m, 2, 0, Manner::Additive).is_err());
    }

    #[test]
    fn adaptive_boundaries() {
        let t = ConstraintTable::new(2, 2, vec![0.0, 100.0, 25.0, 100.0]).unwrap();
        let mut rng = RngPolicy::new(3).agent_stream(0);
        for _ in 0..1000 {
            assert!(!is_violated_adaptive(&t, true, 0, 0, &mut rng));
            assert!(is_violated_adaptive(&t, true, 0, 1, &mut rng));
        }
        let constant = ConstraintTable::new(2, 2, vec![4.0; 4]).unwrap();
        assert_eq!(adaptive_probability(&constant, 4.0), 0.0);
        assert!(!(0..1000).any(|_| is_violated_adaptive(&constant, true, 1, 1, &mut rng)));
    }

    #[test]
    fn adaptive_rate_matches_normalized_cost() {
        let t = ConstraintTable::new(2, 2, vec![0.0, 100.0, 25.0, 100.0]).unwrap();
        let mut rng = RngPolicy::new(11).agent_stream(4);
        let trials = 10_000;
        let hits = (0..trials).filter(|_| is_violated_adaptive(&t, true, 1, 0, &mut rng)).count();
        let rate = hits as f64 / trials as f64;
        assert!((rate - 0.25).abs() <= 0.02, "rate {rate}");
    }

    #[test]
    fn fixed_rules() {
        let t = ConstraintTable::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(is_violated_fixed(ViolationRule::NonZero, &t, true, 0, 0), Some(false));
        assert_eq!(is_violated_fixed(ViolationRule::NonZero, &t, true, 0, 1), Some(true));
        assert_eq!(is_violated_fixed(ViolationRule::Adaptive, &t, true, 0, 1), None);

        let c = ConstraintTable::new(2, 2, vec![3.0; 4]).unwrap();
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert_eq!(is_violated_fixed(ViolationRule::NonMinimum, &c, true, a, b), Some(false));
            assert_eq!(is_violated_fixed(ViolationRule::Maximum, &c, true, a, b), Some(true));
        }

        let u = ConstraintTable::new(2, 3, vec![17.0, 3.0, 88.0, 42.0, 3.0, 60.0]).unwrap();
        for a in 0..2 {
            for b in 0..3 {
                let nm = is_violated_fixed(ViolationRule::NonMinimum, &u, true, a, b).unwrap();
                assert_eq!(nm, u.get(a, b) != 3.0);
                let mx = is_violated_fixed(ViolationRule::Maximum, &u, true, a, b).unwrap();
                assert_eq!(mx, u.get(a, b) == 88.0);
            }
        }
    }

    #[test]
    fn potential_reduces_to_total_cost() {
        let p = Problem::new(ProblemParts {
            domains: vec![2, 3, 2],
            edges: vec![
                RawEdge { i: 0, j: 1, costs: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0] },
                RawEdge { i: 1, j: 2, costs: vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0] },
            ],
        })
        .unwrap();
        let mods: Vec<Vec<CostModifier<f64>>> = (0..3)
            .map(|a| p.neighbors(a).iter().map(|inc| {
                let t = p.table(inc);
                CostModifier::zeros(t.self_size(inc.self_is_row), t.other_size(inc.self_is_row))
            }).collect())
            .collect();
        let views: Vec<&[CostModifier<f64>]> = mods.iter().map(Vec::as_slice).collect();
        let values = [1, 2, 0];
        for manner in [Manner::Additive, Manner::Multiplicative] {
            assert_eq!(potential(&p, &values, &views, manner), p.total_cost(&values).unwrap());
        }
        let empty: Problem<f64> = Problem::new(ProblemParts { domains: vec![2, 2], edges: vec![] }).unwrap();
        assert_eq!(potential(&empty, &[0, 1], &[&[], &[]], Manner::Additive), 0.0);
    }
}
