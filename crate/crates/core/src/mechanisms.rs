//! Assignment matrices, serial dictatorship, RSD and the axiom checks that
//! can be run against any mechanism.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::axioms::{eta_constraints, AxiomConstraint};
use crate::efficiency::{is_expost_efficient, DeterministicAssignment};
use crate::error::{Error, Result};
use crate::exact::{parse_rational, Rational};
use crate::prefs::{apply_swap, permutations, AdjacentSwap, House, Profile, Renaming, MAX_HOUSES};

/// Agent `i`, house `h`: one entry of an assignment matrix.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Cell {
    pub agent: usize,
    pub house: House,
}

impl Cell {
    pub fn new(agent: usize, house: House) -> Self {
        Cell { agent, house }
    }

    pub fn index(&self, m: usize) -> usize {
        self.agent * m + self.house.index()
    }

    pub fn from_index(index: usize, m: usize) -> Self {
        Cell {
            agent: index / m,
            house: House::new(index % m).expect("house index in range"),
        }
    }
}

impl fmt::Display for Cell {
    /// 1-indexed agent, as in the printed tables: `(1,a)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.agent + 1, self.house)
    }
}

/// `n × m` matrix of probabilities: entry `(i, h)` is the chance agent `i`
/// receives house `h`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AssignmentMatrix {
    n: usize,
    m: usize,
    entries: Vec<Rational>,
}

impl AssignmentMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        AssignmentMatrix {
            n,
            m,
            entries: vec![Rational::zero(); n * m],
        }
    }

    pub fn from_fn(n: usize, m: usize, mut f: impl FnMut(usize, House) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(n * m);
        for i in 0..n {
            for h in House::all(m) {
                entries.push(f(i, h));
            }
        }
        AssignmentMatrix { n, m, entries }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidMatrix("rows of different lengths".into()));
        }
        Ok(AssignmentMatrix {
            n,
            m,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_assignment(a: &DeterministicAssignment, m: usize) -> Self {
        AssignmentMatrix::from_fn(a.n(), m, |i, h| {
            if a.house_of(i) == h {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, agent: usize, h: House) -> &Rational {
        &self.entries[agent * self.m + h.index()]
    }

    pub fn at(&self, cell: Cell) -> &Rational {
        self.get(cell.agent, cell.house)
    }

    pub fn set(&mut self, agent: usize, h: House, value: Rational) {
        self.entries[agent * self.m + h.index()] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.entries[agent * self.m..(agent + 1) * self.m]
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.m).map(<[Rational]>::to_vec).collect()
    }

    /// The matrix of the renamed profile: agent `i` becomes `r.agents[i]`,
    /// house `h` becomes `r.houses[h]`.
    pub fn renamed(&self, r: &Renaming) -> AssignmentMatrix {
        let mut out = AssignmentMatrix::zeros(self.n, self.m);
        for i in 0..self.n {
            for h in House::all(self.m) {
                out.set(r.agents[i], r.house(h), self.get(i, h).clone());
            }
        }
        out
    }

    /// Entries in `[0,1]`, rows summing to one, columns to at most one
    /// (exactly one when `n = m`).
    pub fn validate(&self) -> Result<()> {
        if self.n > self.m {
            return Err(Error::MoreAgentsThanHouses { n: self.n, m: self.m });
        }
        if let Some(v) = self.entries.iter().find(|v| v.is_negative() || **v > Rational::one()) {
            return Err(Error::InvalidMatrix(format!("entry {v} outside [0,1]")));
        }
        for i in 0..self.n {
            let s: Rational = self.row(i).iter().sum();
            if !s.is_one() {
                return Err(Error::InvalidMatrix(format!("row {} sums to {s}", i + 1)));
            }
        }
        for h in House::all(self.m) {
            let s: Rational = (0..self.n).map(|i| self.get(i, h)).sum();
            if s > Rational::one() || (self.n == self.m && !s.is_one()) {
                return Err(Error::InvalidMatrix(format!("column {h} sums to {s}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for AssignmentMatrix {
    /// Aligned table, houses across, agents (1-indexed) down.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.entries.iter().map(ToString::to_string).collect();
        let width = cells.iter().map(String::len).max().unwrap_or(1).max(1);
        write!(f, "   ")?;
        for h in House::all(self.m) {
            write!(f, " {:>width$}", h.letter())?;
        }
        writeln!(f)?;
        for i in 0..self.n {
            write!(f, "{:>3}", i + 1)?;
            for c in &cells[i * self.m..(i + 1) * self.m] {
                write!(f, " {c:>width$}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Serialize for AssignmentMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .entries
            .chunks(self.m.max(1))
            .map(|r| r.iter().map(ToString::to_string).collect())
            .collect();
        let mut s = serializer.serialize_struct("AssignmentMatrix", 3)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("m", &self.m)?;
        s.serialize_field("entries", &rows)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for AssignmentMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            m: usize,
            entries: Vec<Vec<String>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let rows = raw
            .entries
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        let matrix = AssignmentMatrix::from_rows(rows).map_err(serde::de::Error::custom)?;
        if matrix.n != raw.n || (raw.n > 0 && matrix.m != raw.m) {
            return Err(serde::de::Error::custom("header does not match entries"));
        }
        Ok(AssignmentMatrix { m: raw.m, ..matrix })
    }
}

/// A fixed-size mechanism: a pure function from profiles to matrices.
pub trait Mechanism: Sync {
    fn assign(&self, p: &Profile) -> AssignmentMatrix;
}

impl<F> Mechanism for F
where
    F: Fn(&Profile) -> AssignmentMatrix + Sync,
{
    fn assign(&self, p: &Profile) -> AssignmentMatrix {
        self(p)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RandomSerialDictatorship;

impl Mechanism for RandomSerialDictatorship {
    fn assign(&self, p: &Profile) -> AssignmentMatrix {
        rsd(p).expect("RSD is defined for n <= m <= 6")
    }
}

/// Agents pick in `ordering`, each taking his favourite remaining house.
pub fn serial_dictatorship(p: &Profile, ordering: &[usize]) -> Result<DeterministicAssignment> {
    let n = p.n();
    let m = p.m();
    if n > m {
        return Err(Error::MoreAgentsThanHouses { n, m });
    }
    let mut check = ordering.to_vec();
    check.sort_unstable();
    if check != (0..n).collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch(format!(
            "{ordering:?} is not an ordering of {n} agents"
        )));
    }
    let mut taken = [false; MAX_HOUSES];
    let mut houses = vec![House::new(0)?; n];
    for &i in ordering {
        let h = *p
            .ranking(i)
            .houses()
            .iter()
            .find(|h| !taken[h.index()])
            .expect("n <= m leaves a house free");
        taken[h.index()] = true;
        houses[i] = h;
    }
    DeterministicAssignment::new(houses)
}

/// Random serial dictatorship: the exact average of serial dictatorship
/// over all `n!` orderings.
pub fn rsd(p: &Profile) -> Result<AssignmentMatrix> {
    let n = p.n();
    let m = p.m();
    if n > m {
        return Err(Error::MoreAgentsThanHouses { n, m });
    }
    if n > 6 {
        return Err(Error::SizeGuard {
            what: "rsd agents",
            limit: 6,
            got: n,
        });
    }
    let orderings = permutations(n);
    let mut counts = vec![0u64; n * m];
    for order in &orderings {
        let a = serial_dictatorship(p, order)?;
        for i in 0..n {
            counts[i * m + a.house_of(i).index()] += 1;
        }
    }
    let total = orderings.len() as i64;
    Ok(AssignmentMatrix {
        n,
        m,
        entries: counts
            .into_iter()
            .map(|c| crate::exact::rational(c as i64, total))
            .collect(),
    })
}

/// Strategy-proofness across one adjacent swap: the swapping agent's
/// probabilities of every other house, and of the swapped pair together,
/// are unchanged.
pub fn check_sp(mech: &dyn Mechanism, p: &Profile, s: AdjacentSwap) -> Result<bool> {
    let q = apply_swap(p, s)?;
    let (x, y) = s.houses(p);
    let before = mech.assign(p);
    let after = mech.assign(&q);
    let i = s.agent;
    for h in House::all(p.m()) {
        if h != x && h != y && before.get(i, h) != after.get(i, h) {
            return Ok(false);
        }
    }
    Ok(before.get(i, x) + before.get(i, y) == after.get(i, x) + after.get(i, y))
}

pub fn check_eta(mech: &dyn Mechanism, p: &Profile) -> bool {
    satisfies_eta(&mech.assign(p), p)
}

pub(crate) fn satisfies_eta(matrix: &AssignmentMatrix, p: &Profile) -> bool {
    eta_constraints(p).iter().all(|c| match c {
        AxiomConstraint::Equality { cells, .. } => cells.windows(2).all(|w| matrix.at(w[0]) == matrix.at(w[1])),
        _ => true,
    })
}

pub fn check_expe(mech: &dyn Mechanism, p: &Profile) -> Result<bool> {
    is_expost_efficient(&mech.assign(p), p)
}
