//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Problems are in standard form: minimise `c·x` subject to `A x = b`,
//! `x >= 0`. Sizes here are tiny (tens of rows), so the tableau is dense.

use num_traits::{One, Signed, Zero};

use super::Rational;

#[derive(Clone, Debug)]
pub struct StandardForm {
    pub a: Vec<Vec<Rational>>,
    pub b: Vec<Rational>,
    pub c: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// rows × (cols + 1); last column is the right-hand side
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations for `cost` restricted to columns `< allowed`.
    /// Returns false if unbounded.
    fn optimise(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            // reduced cost d_j = c_j - c_B · column_j
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (r, &bj) in self.basis.iter().enumerate() {
                    if !self.rows[r][j].is_zero() && !cost[bj].is_zero() {
                        d -= &cost[bj] * &self.rows[r][j];
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if a.is_positive() {
                    let ratio = &self.rows[r][self.cols] / a;
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, j),
                None => return false,
            }
        }
    }
}

pub fn solve_lp(problem: &StandardForm) -> LpOutcome {
    let m = problem.a.len();
    let n = problem.c.len();
    // phase one: artificial column per row, b made non-negative
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, b)) in problem.a.iter().zip(&problem.b).enumerate() {
        let flip = b.is_negative();
        let mut t = Vec::with_capacity(cols + 1);
        for v in row {
            t.push(if flip { -v.clone() } else { v.clone() });
        }
        for k in 0..m {
            t.push(if k == i { Rational::one() } else { Rational::zero() });
        }
        t.push(if flip { -b.clone() } else { b.clone() });
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        basis: (n..n + m).collect(),
        cols,
    };
    let mut phase_one = vec![Rational::zero(); cols];
    for v in &mut phase_one[n..] {
        *v = Rational::one();
    }
    tab.optimise(&phase_one, cols);
    let infeasibility: Rational = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n)
        .map(|(r, _)| tab.rows[r][cols].clone())
        .sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // drive remaining (zero-valued) artificials out of the basis
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| !tab.rows[r][j].is_zero()) {
                Some(j) => tab.pivot(r, j),
                None => {
                    // redundant constraint
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut cost = problem.c.clone();
    cost.resize(cols, Rational::zero());
    if !tab.optimise(&cost, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[r][cols].clone();
        }
    }
    let value = x.iter().zip(&problem.c).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, value }
}
