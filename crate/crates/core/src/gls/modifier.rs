use crate::scalar::Scalar;

use super::Scope;

/// Penalty matrix of one incident constraint, oriented with the owning agent's values as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModifier<S> {
    rows: usize,
    cols: usize,
    entries: Vec<S>,
}

impl<S: Scalar> CostModifier<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![S::zero(); rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, d_self: usize, d_other: usize) -> S {
        self.entries[d_self * self.cols + d_other]
    }

    pub fn add_cell(&mut self, d_self: usize, d_other: usize, amount: S) {
        self.entries[d_self * self.cols + d_other] += amount;
    }

    pub fn add_row(&mut self, d_self: usize, amount: S) {
        let start = d_self * self.cols;
        for e in &mut self.entries[start..start + self.cols] {
            *e += amount;
        }
    }

    pub fn add_col(&mut self, d_other: usize, amount: S) {
        for e in self.entries.iter_mut().skip(d_other).step_by(self.cols) {
            *e += amount;
        }
    }

    pub fn add_all(&mut self, amount: S) {
        for e in &mut self.entries {
            *e += amount;
        }
    }

    /// Geometric decay of every entry.
    pub fn evaporate(&mut self, gamma: S) {
        for e in &mut self.entries {
            *e *= gamma;
        }
    }

    pub fn max_entry(&self) -> S {
        self.entries.iter().copied().fold(S::neg_infinity(), S::max)
    }

    /// True when `other` is this matrix transposed, compared bit for bit.
    pub fn is_transpose_of(&self, other: &Self) -> bool {
        self.rows == other.cols
            && self.cols == other.rows
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| self.get(r, c).as_f64().to_bits() == other.get(c, r).as_f64().to_bits())
            })
    }
}

/// Coordinated update of one edge's modifier from the owner's side.
///
/// `self_penalized`: the owner flagged the constraint this round. `neighbor_penalized`:
/// the neighbor did and told the owner so. Both endpoints run this with the roles
/// mirrored, and the per-entry sequence of additions is the same on both sides, so
/// modifiers that were transposes before the update stay transposes after it.
pub fn increase_mod<S: Scalar>(
    modifier: &mut CostModifier<S>,
    scope: Scope,
    d_self: usize,
    d_other: usize,
    self_penalized: bool,
    neighbor_penalized: bool,
) {
    let one = S::one();
    match scope {
        Scope::Cell => {
            if self_penalized || neighbor_penalized {
                modifier.add_cell(d_self, d_other, one);
            }
        }
        Scope::Table => {
            if self_penalized || neighbor_penalized {
                modifier.add_all(one);
            }
        }
        Scope::Row | Scope::Column => {
            // row scope: the initiator penalizes its own row, the mirror is the column
            let (own, mirrored) = match scope {
                Scope::Row => (self_penalized, neighbor_penalized),
                _ => (neighbor_penalized, self_penalized),
            };
            if own {
                modifier.add_row(d_self, one);
            }
            if mirrored {
                modifier.add_col(d_other, one);
            }
            if self_penalized && neighbor_penalized {
                modifier.add_cell(d_self, d_other, -one);
            }
        }
    }
}

/// Uncoordinated breakout update: the owner alone raises the penalty of a violated constraint.
pub fn increase_unilateral<S: Scalar>(modifier: &mut CostModifier<S>, scope: Scope, d_self: usize, d_other: usize) {
    let one = S::one();
    match scope {
        Scope::Cell => modifier.add_cell(d_self, d_other, one),
        Scope::Table => modifier.add_all(one),
        Scope::Row => modifier.add_row(d_self, one),
        Scope::Column => modifier.add_col(d_other, one),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(m: &CostModifier<f64>) -> Vec<Vec<f64>> {
        (0..m.rows()).map(|r| (0..m.cols()).map(|c| m.get(r, c)).collect()).collect()
    }

    #[test]
    fn evaporation() {
        let mut m = CostModifier::<f64>::zeros(2, 2);
        m.evaporate(0.5);
        assert_eq!(m, CostModifier::zeros(2, 2));
        m.add_cell(0, 1, 1.0);
        m.evaporate(0.5);
        assert_eq!(m.get(0, 1), 0.5);

        // incremented every round: 1 + g + g^2
        let mut m = CostModifier::<f64>::zeros(1, 1);
        for _ in 0..3 {
            m.evaporate(0.5);
            m.add_cell(0, 0, 1.0);
        }
        assert_eq!(m.get(0, 0), 1.75);
    }

    #[test]
    fn untouched_when_nobody_penalizes() {
        for scope in [Scope::Cell, Scope::Table, Scope::Row, Scope::Column] {
            let mut m = CostModifier::<f64>::zeros(2, 3);
            increase_mod(&mut m, scope, 1, 2, false, false);
            assert_eq!(m, CostModifier::zeros(2, 3));
        }
    }

    #[test]
    fn row_scope_both_sides() {
        let mut m = CostModifier::<f64>::zeros(2, 2);
        increase_mod(&mut m, Scope::Row, 0, 0, true, true);
        assert_eq!(grid(&m), vec![vec![1.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn scope_cases() {
        let mut m = CostModifier::<f64>::zeros(2, 3);
        increase_mod(&mut m, Scope::Table, 0, 0, false, true);
        assert!(m.entries().iter().all(|&e| e == 1.0));

        let mut m = CostModifier::<f64>::zeros(2, 3);
        increase_mod(&mut m, Scope::Cell, 1, 2, true, true);
        assert_eq!(grid(&m), vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]);

        let mut m = CostModifier::<f64>::zeros(2, 3);
        increase_mod(&mut m, Scope::Row, 1, 2, false, true);
        assert_eq!(grid(&m), vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]]);

        let mut m = CostModifier::<f64>::zeros(2, 3);
        increase_mod(&mut m, Scope::Column, 1, 2, true, false);
        assert_eq!(grid(&m), vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0]]);

        let mut m = CostModifier::<f64>::zeros(2, 3);
        increase_mod(&mut m, Scope::Column, 1, 2, true, true);
        assert_eq!(grid(&m), vec![vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]]);
    }

    #[test]
    fn mirrored_updates_keep_transposes() {
        for scope in [Scope::Cell, Scope::Table, Scope::Row, Scope::Column] {
            for (a, b) in [(true, false), (false, true), (true, true)] {
                let mut mine = CostModifier::<f64>::zeros(2, 3);
                let mut theirs = CostModifier::<f64>::zeros(3, 2);
                mine.add_cell(1, 0, 0.3);
                theirs.add_cell(0, 1, 0.3);
                increase_mod(&mut mine, scope, 1, 2, a, b);
                increase_mod(&mut theirs, scope, 2, 1, b, a);
                assert!(mine.is_transpose_of(&theirs), "{scope:?} {a} {b}");
                assert!(mine.entries().iter().all(|&e| e >= 0.0));
            }
        }
    }

    #[test]
    fn unilateral_scopes() {
        let mut m = CostModifier::<f64>::zeros(2, 2);
        increase_unilateral(&mut m, Scope::Row, 1, 0);
        increase_unilateral(&mut m, Scope::Column, 1, 0);
        assert_eq!(grid(&m), vec![vec![1.0, 0.0], vec![2.0, 1.0]]);
        increase_unilateral(&mut m, Scope::Table, 0, 0);
        increase_unilateral(&mut m, Scope::Cell, 0, 1);
        assert_eq!(grid(&m), vec![vec![2.0, 2.0], vec![3.0, 2.0]]);
    }
}
