//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Small by design: the oracle programs have at most a few dozen columns.

use num_traits::{One, Signed, Zero};

use crate::num::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// `maximize objective · x` subject to `rows` and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<Q>,
    pub rows: Vec<(Vec<Q>, Relation, Q)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    /// Reduced costs; the last entry is `−z`.
    cost: Vec<Q>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                *v /= &p;
            }
        }
        let pivot_row = self.rows[r].clone();
        let eliminate = |row: &mut Vec<Q>| {
            let f = row[c].clone();
            if !f.is_zero() {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.basis[r] = c;
    }

    /// Sets the cost row to `c` reduced against the current basis.
    fn set_objective(&mut self, c: &[Q]) {
        let w = self.width();
        let mut cost: Vec<Q> = c.iter().cloned().chain(std::iter::repeat(Q::zero())).take(w + 1).collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let f = cost[b].clone();
            if !f.is_zero() {
                for (v, rv) in cost.iter_mut().zip(row) {
                    *v -= &f * rv;
                }
            }
        }
        self.cost = cost;
    }

    /// Runs simplex iterations over the columns `< limit`. Returns `false` if
    /// unbounded.
    fn optimize(&mut self, limit: usize) -> bool {
        loop {
            let Some(enter) = (0..limit).find(|&j| self.cost[j].is_positive()) else {
                return true;
            };
            let w = self.width();
            let mut leave: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter].is_positive() {
                    let ratio = &row[w] / &row[enter];
                    let better = match &leave {
                        None => true,
                        Some((l, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

impl LinearProgram {
    pub fn maximize(&self) -> LpOutcome {
        let n = self.objective.len();
        let slack_count = self.rows.iter().filter(|(_, rel, _)| *rel != Relation::Eq).count();
        let art_count = self
            .rows
            .iter()
            .filter(|(_, rel, b)| match rel {
                Relation::Le => b.is_negative(),
                Relation::Ge => !b.is_negative(),
                Relation::Eq => true,
            })
            .count();
        let art_start = n + slack_count;
        let width = art_start + art_count;

        let mut rows = Vec::with_capacity(self.rows.len());
        let mut basis = Vec::with_capacity(self.rows.len());
        let (mut next_slack, mut next_art) = (n, art_start);
        for (a, rel, b) in &self.rows {
            debug_assert_eq!(a.len(), n);
            let mut row = vec![Q::zero(); width + 1];
            row[..n].clone_from_slice(a);
            row[width] = b.clone();
            let mut slack_col = None;
            if *rel != Relation::Eq {
                row[next_slack] = if *rel == Relation::Le { Q::one() } else { -Q::one() };
                slack_col = Some(next_slack);
                next_slack += 1;
            }
            if b.is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            match slack_col {
                Some(s) if row[s].is_one() => basis.push(s),
                _ => {
                    row[next_art] = Q::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        let mut t = Tableau { rows, cost: vec![Q::zero(); width + 1], basis };

        if art_count > 0 {
            let mut phase1 = vec![Q::zero(); width];
            for c in phase1.iter_mut().skip(art_start) {
                *c = -Q::one();
            }
            t.set_objective(&phase1);
            t.optimize(width);
            // cost[width] holds −z = Σ artificials at the optimum.
            if !t.cost[width].is_zero() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-valued artificials out of the basis or drop the row.
            let mut r = 0;
            while r < t.rows.len() {
                if t.basis[r] >= art_start {
                    match (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                        Some(j) => t.pivot(r, j),
                        None => {
                            t.rows.remove(r);
                            t.basis.remove(r);
                            continue;
                        }
                    }
                }
                r += 1;
            }
            for row in t.rows.iter_mut() {
                row.drain(art_start..width);
            }
            t.cost = vec![Q::zero(); art_start + 1];
        }
        t.set_objective(&self.objective);
        if !t.optimize(n + slack_count) {
            return LpOutcome::Unbounded;
        }
        let w = t.width();
        let mut x = vec![Q::zero(); n];
        for (row, &b) in t.rows.iter().zip(&t.basis) {
            if b < n {
                x[b] = row[w].clone();
            }
        }
        LpOutcome::Optimal { value: -t.cost[w].clone(), x }
    }
}
