//! Exact rational linear algebra.
//!
//! Everything here works over arbitrary-precision rationals; there is no
//! floating point anywhere in the verifier.

pub mod simplex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use simplex::{solve_lp, LpOutcome, StandardForm};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::BadRational(s.to_string());
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: BigInt = p.trim().parse().map_err(|_| bad())?;
    let q: BigInt = q.trim().parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// Serde adapters writing rationals as `"p/q"` strings (`"p"` when `q = 1`).
pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

/// Linear equalities over variables `0..num_vars`, each implicitly bounded
/// to `[0, 1]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearSystem {
    num_vars: usize,
    equations: Vec<Equation>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        LinearSystem {
            num_vars,
            equations: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn add_equation(&mut self, terms: Vec<(usize, Rational)>, rhs: Rational) -> Result<()> {
        if let Some(&(v, _)) = terms.iter().find(|(v, _)| *v >= self.num_vars) {
            return Err(Error::DimensionMismatch(format!(
                "variable {v} in a system of {} variables",
                self.num_vars
            )));
        }
        self.equations.push(Equation { terms, rhs });
        Ok(())
    }

    /// `x_v = value`
    pub fn fix(&mut self, v: usize, value: Rational) -> Result<()> {
        self.add_equation(vec![(v, Rational::one())], value)
    }

    /// `Σ x_v = value` over `vars`
    pub fn sum(&mut self, vars: &[usize], value: Rational) -> Result<()> {
        self.add_equation(vars.iter().map(|&v| (v, Rational::one())).collect(), value)
    }

    /// `x_a = x_b`
    pub fn equal(&mut self, a: usize, b: usize) -> Result<()> {
        self.add_equation(vec![(a, Rational::one()), (b, -Rational::one())], Rational::zero())
    }

    /// Residual `Σ coef·x − rhs` of every equation at `x`.
    pub fn residuals(&self, x: &[Rational]) -> Vec<Rational> {
        self.equations
            .iter()
            .map(|e| e.terms.iter().map(|(v, c)| c * &x[*v]).sum::<Rational>() - &e.rhs)
            .collect()
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars && self.residuals(x).iter().all(Zero::is_zero)
    }

    /// Reduced row echelon form of the equalities, or `None` if they are
    /// inconsistent.
    pub fn reduce(&self) -> Option<Reduced> {
        let n = self.num_vars;
        let mut rows: Vec<Vec<Rational>> = self
            .equations
            .iter()
            .map(|e| {
                let mut row = vec![Rational::zero(); n + 1];
                for (v, c) in &e.terms {
                    row[*v] += c;
                }
                row[n] = e.rhs.clone();
                row
            })
            .collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..n {
            let Some(p) = (r..rows.len()).find(|&k| !rows[k][col].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = rows[r][col].recip();
            for v in rows[r].iter_mut() {
                *v *= &inv;
            }
            let pivot_row = rows[r].clone();
            for (k, row) in rows.iter_mut().enumerate() {
                if k == r || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row).skip(col) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
            pivots.push(col);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        if rows[r..].iter().any(|row| !row[n].is_zero()) {
            return None;
        }
        rows.truncate(r);
        Some(Reduced {
            num_vars: n,
            pivots,
            rows,
        })
    }
}

/// RREF of a consistent system: `x_pivot = rhs − Σ coef · x_free`.
#[derive(Clone, Debug)]
pub struct Reduced {
    num_vars: usize,
    pivots: Vec<usize>,
    rows: Vec<Vec<Rational>>,
}

impl Reduced {
    /// Dimension of the affine solution space (ignoring the box).
    pub fn dimension(&self) -> usize {
        self.num_vars - self.pivots.len()
    }

    pub fn free_vars(&self) -> Vec<usize> {
        (0..self.num_vars).filter(|v| !self.pivots.contains(v)).collect()
    }

    /// Values fixed by the equalities alone.
    pub fn pinned(&self) -> Vec<Option<Rational>> {
        let n = self.num_vars;
        let mut out = vec![None; n];
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if row[..n].iter().enumerate().all(|(j, c)| j == p || c.is_zero()) {
                out[p] = Some(row[n].clone());
            }
        }
        out
    }

    /// The solution with every free variable at zero.
    pub fn particular(&self) -> Vec<Rational> {
        let n = self.num_vars;
        let mut x = vec![Rational::zero(); n];
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            x[p] = row[n].clone();
        }
        x
    }

    /// Equalities of the reduced system in standard form plus slacks for the
    /// upper bounds: variables `0..n` are the originals, `n..2n` the slacks.
    fn box_program(&self, cost: Vec<Rational>) -> StandardForm {
        let n = self.num_vars;
        let mut a = Vec::new();
        let mut b = Vec::new();
        for row in &self.rows {
            let mut r = row[..n].to_vec();
            r.resize(2 * n, Rational::zero());
            a.push(r);
            b.push(row[n].clone());
        }
        for v in 0..n {
            let mut r = vec![Rational::zero(); 2 * n];
            r[v] = Rational::one();
            r[n + v] = Rational::one();
            a.push(r);
            b.push(Rational::one());
        }
        StandardForm { a, b, c: cost }
    }

    fn extreme(&self, v: usize, maximise: bool) -> Option<Rational> {
        let n = self.num_vars;
        let mut cost = vec![Rational::zero(); 2 * n];
        cost[v] = if maximise { -Rational::one() } else { Rational::one() };
        match solve_lp(&self.box_program(cost)) {
            LpOutcome::Optimal { x, .. } => Some(x[v].clone()),
            _ => None,
        }
    }

    /// Values fixed once the `[0,1]` box is taken into account, or `None` if
    /// the box misses the affine space entirely.
    pub fn box_pinned(&self) -> Option<Vec<Option<Rational>>> {
        let mut out = self.pinned();
        let n = self.num_vars;
        let feasible = solve_lp(&self.box_program(vec![Rational::zero(); 2 * n]));
        if !matches!(feasible, LpOutcome::Optimal { .. }) {
            return None;
        }
        for v in 0..n {
            if out[v].is_some() {
                continue;
            }
            let lo = self.extreme(v, false)?;
            let hi = self.extreme(v, true)?;
            if lo == hi {
                out[v] = Some(lo);
            }
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SolveOutcome {
    Unique(Vec<Rational>),
    /// `dimension` is that of the affine solution space of the equalities;
    /// the box leaves at least one variable free.
    Underdetermined {
        dimension: usize,
    },
    Infeasible,
}

/// Classifies the solution set of `sys` within `[0,1]^V`.
pub fn solve(sys: &LinearSystem) -> SolveOutcome {
    let Some(reduced) = sys.reduce() else {
        return SolveOutcome::Infeasible;
    };
    let in_box = |x: &[Rational]| x.iter().all(|v| !v.is_negative() && *v <= Rational::one());
    if reduced.dimension() == 0 {
        let x = reduced.particular();
        return if in_box(&x) {
            SolveOutcome::Unique(x)
        } else {
            SolveOutcome::Infeasible
        };
    }
    match reduced.box_pinned() {
        None => SolveOutcome::Infeasible,
        Some(values) if values.iter().all(Option::is_some) => {
            SolveOutcome::Unique(values.into_iter().map(Option::unwrap).collect())
        }
        Some(_) => SolveOutcome::Underdetermined {
            dimension: reduced.dimension(),
        },
    }
}

/// Non-negative weights summing to one with `Σ w_k · vertex_k = target`.
pub fn feasible_combination(target: &[Vec<Rational>], vertices: &[Vec<Vec<bool>>]) -> Result<Option<Vec<Rational>>> {
    if vertices.is_empty() {
        return Err(Error::DimensionMismatch("no vertices".into()));
    }
    let rows = target.len();
    let cols = target.first().map_or(0, Vec::len);
    if target.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged target".into()));
    }
    for (k, v) in vertices.iter().enumerate() {
        if v.len() != rows || v.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch(format!("vertex {k} is not {rows}x{cols}")));
        }
    }
    let mut a = Vec::with_capacity(rows * cols + 1);
    let mut b = Vec::with_capacity(rows * cols + 1);
    a.push(vec![Rational::one(); vertices.len()]);
    b.push(Rational::one());
    for i in 0..rows {
        for j in 0..cols {
            a.push(
                vertices
                    .iter()
                    .map(|v| if v[i][j] { Rational::one() } else { Rational::zero() })
                    .collect(),
            );
            b.push(target[i][j].clone());
        }
    }
    let problem = StandardForm {
        a,
        b,
        c: vec![Rational::zero(); vertices.len()],
    };
    Ok(match solve_lp(&problem) {
        LpOutcome::Optimal { x, .. } => Some(x),
        _ => None,
    })
}
