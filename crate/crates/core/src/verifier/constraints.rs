//! Assembly of the linear system the axioms impose on one profile, given
//! what is already known about its neighbours.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::universe::Universe;
use crate::axioms::{eta_constraints, sp_links, AxiomConstraint, Provenance};
use crate::efficiency::analyze_efficiency;
use crate::error::{Error, Result};
use crate::exact::{serde_rational, LinearSystem, Rational};
use crate::mechanisms::Cell;
use crate::prefs::{canonicalize, AdjacentSwap, House, Profile};

/// A determined entry and the round in which it was determined.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Known {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub round: u32,
}

/// Row-major, indexed by [`Cell::index`].
pub type KnownMatrix = Vec<Option<Known>>;

/// Read access to determined entries of arbitrary (not necessarily
/// canonical) profiles, in that profile's own labelling.
pub trait SourceLookup: Sync {
    fn known(&self, q: &Profile) -> Option<KnownMatrix>;
}

/// Entries of canonical representatives, shared by every profile of the
/// orbit through renaming.
#[derive(Clone, Debug)]
pub struct KnowledgeDb {
    universe: Arc<Universe>,
    entries: Vec<KnownMatrix>,
}

impl KnowledgeDb {
    pub fn empty(universe: Arc<Universe>) -> Self {
        let cells = universe.n() * universe.m();
        let entries = vec![vec![None; cells]; universe.len()];
        KnowledgeDb { universe, entries }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn representative(&self, k: usize) -> &KnownMatrix {
        &self.entries[k]
    }

    pub(crate) fn set(&mut self, k: usize, cell: Cell, known: Known) {
        let m = self.universe.m();
        self.entries[k][cell.index(m)] = Some(known);
    }
}

impl SourceLookup for KnowledgeDb {
    fn known(&self, q: &Profile) -> Option<KnownMatrix> {
        let (n, m) = (self.universe.n(), self.universe.m());
        if q.n() != n || q.m() != m {
            return None;
        }
        let form = canonicalize(q);
        let rep = &self.entries[self.universe.index_of(&form.representative)?];
        let r = form.renaming();
        Some(
            (0..n * m)
                .map(|k| {
                    let c = Cell::from_index(k, m);
                    rep[Cell::new(r.agents[c.agent], r.house(c.house)).index(m)].clone()
                })
                .collect(),
        )
    }
}

/// Plain map from profiles to known entries; used for hand-built databases.
impl SourceLookup for HashMap<Profile, KnownMatrix> {
    fn known(&self, q: &Profile) -> Option<KnownMatrix> {
        self.get(q).cloned()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImportCells {
    /// A house outside the swapped pair keeps its probability.
    Entry { cell: Cell },
    /// The swapped pair keeps its total probability.
    PairSum { cells: [Cell; 2] },
}

/// A value imported across one adjacent swap.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ImportRef {
    /// The neighbour, in the citing profile's labelling.
    pub source: Profile,
    pub swap: AdjacentSwap,
    /// Disagreement parameter of the source.
    pub level: u32,
    /// Latest round among the source entries used.
    pub round: u32,
    pub cells: ImportCells,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

impl ImportRef {
    pub fn constraint(&self) -> AxiomConstraint {
        let provenance = Provenance {
            source: self.source.clone(),
            swap: self.swap,
        };
        match &self.cells {
            ImportCells::Entry { cell } => AxiomConstraint::PinnedValue {
                cell: *cell,
                value: self.value.clone(),
                provenance,
            },
            ImportCells::PairSum { cells } => AxiomConstraint::SumPin {
                cells: *cells,
                value: self.value.clone(),
                provenance,
            },
        }
    }
}

/// Everything known about one profile before a given round.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub profile: Profile,
    /// Forced zeros, ETA equalities and SP imports.
    pub constraints: Vec<AxiomConstraint>,
    pub imports: Vec<ImportRef>,
    /// The profile's own entries determined in earlier rounds.
    pub own: Vec<Option<Rational>>,
    /// The above plus row sums (and column sums when `n = m`).
    pub system: LinearSystem,
}

impl ConstraintSystem {
    pub fn forced_zero(&self, cell: Cell) -> bool {
        self.constraints
            .iter()
            .any(|c| matches!(c, AxiomConstraint::ForcedZero(z) if *z == cell))
    }

    pub fn eta_classes(&self) -> impl Iterator<Item = &[Cell]> {
        self.constraints.iter().filter_map(|c| match c {
            AxiomConstraint::Equality { cells, .. } => Some(cells.as_slice()),
            _ => None,
        })
    }
}

/// Imports available to `p` from entries determined before round `before`.
pub fn available_imports(p: &Profile, db: &dyn SourceLookup, before: u32) -> Vec<ImportRef> {
    let m = p.m();
    let mut out = Vec::new();
    for (swap, q) in sp_links(p) {
        let Some(known) = db.known(&q) else { continue };
        let usable = |c: Cell| known[c.index(m)].as_ref().filter(|k| k.round < before);
        let level = q.disagreement_parameter();
        let i = swap.agent;
        let (x, y) = swap.houses(p);
        for h in House::all(m) {
            if h == x || h == y {
                continue;
            }
            let cell = Cell::new(i, h);
            if let Some(k) = usable(cell) {
                out.push(ImportRef {
                    source: q.clone(),
                    swap,
                    level,
                    round: k.round,
                    cells: ImportCells::Entry { cell },
                    value: k.value.clone(),
                });
            }
        }
        let (cx, cy) = (Cell::new(i, x), Cell::new(i, y));
        if let (Some(kx), Some(ky)) = (usable(cx), usable(cy)) {
            out.push(ImportRef {
                source: q.clone(),
                swap,
                level,
                round: kx.round.max(ky.round),
                cells: ImportCells::PairSum { cells: [cx, cy] },
                value: &kx.value + &ky.value,
            });
        }
    }
    out
}

/// Adds the axioms, the given own entries and the given imports to a fresh
/// system over the `n·m` entries of `p`.
pub(crate) fn assemble(
    p: &Profile,
    own: &[Option<Rational>],
    imports: &[ImportRef],
) -> Result<(Vec<AxiomConstraint>, LinearSystem)> {
    let (n, m) = (p.n(), p.m());
    let idx = |c: Cell| c.index(m);
    let mut constraints = Vec::new();
    let mut sys = LinearSystem::new(n * m);
    for (i, h) in analyze_efficiency(p)?.forced_zero_cells() {
        let c = Cell::new(i, h);
        sys.fix(idx(c), Rational::zero())?;
        constraints.push(AxiomConstraint::ForcedZero(c));
    }
    for c in eta_constraints(p) {
        if let AxiomConstraint::Equality { cells, .. } = &c {
            for w in cells.windows(2) {
                sys.equal(idx(w[0]), idx(w[1]))?;
            }
        }
        constraints.push(c);
    }
    for imp in imports {
        match &imp.cells {
            ImportCells::Entry { cell } => sys.fix(idx(*cell), imp.value.clone())?,
            ImportCells::PairSum { cells } => sys.sum(&[idx(cells[0]), idx(cells[1])], imp.value.clone())?,
        }
        constraints.push(imp.constraint());
    }
    for i in 0..n {
        let row: Vec<usize> = House::all(m).map(|h| idx(Cell::new(i, h))).collect();
        sys.sum(&row, Rational::one())?;
    }
    if n == m {
        for h in House::all(m) {
            let col: Vec<usize> = (0..n).map(|i| idx(Cell::new(i, h))).collect();
            sys.sum(&col, Rational::one())?;
        }
    }
    if own.len() != n * m {
        return Err(Error::DimensionMismatch(format!(
            "{} own entries for {n}x{m}",
            own.len()
        )));
    }
    for (k, v) in own.iter().enumerate() {
        if let Some(v) = v {
            sys.fix(k, v.clone())?;
        }
    }
    Ok((constraints, sys))
}

/// The constraint system of `p` from everything `db` determined before
/// round `before`, including `p`'s own entries.
pub fn build_constraints(p: &Profile, db: &dyn SourceLookup, before: u32) -> Result<ConstraintSystem> {
    let cells = p.n() * p.m();
    let own: Vec<Option<Rational>> = match db.known(p) {
        Some(k) => k
            .into_iter()
            .map(|e| e.filter(|e| e.round < before).map(|e| e.value))
            .collect(),
        None => vec![None; cells],
    };
    let imports = available_imports(p, db, before);
    let (constraints, system) = assemble(p, &own, &imports)?;
    Ok(ConstraintSystem {
        profile: p.clone(),
        constraints,
        imports,
        own,
        system,
    })
}
