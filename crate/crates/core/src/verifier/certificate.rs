//! Per-entry determination certificates and their replay.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::constraints::{assemble, ConstraintSystem, ImportCells, ImportRef, SourceLookup};
use crate::axioms::{eta_constraints, AxiomConstraint};
use crate::efficiency::analyze_efficiency;
use crate::exact::{serde_rational, Rational};
use crate::mechanisms::{AssignmentMatrix, Cell};
use crate::prefs::{apply_swap, House, Profile, Renaming};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "reason")]
pub enum Reason {
    /// No efficient assignment gives the house to the agent.
    Efficiency,
    /// Equal to an already determined entry of the same ETA class.
    Eta { partner: Cell },
    /// Carried over from a neighbour; for a pair sum `partner` is the other
    /// (already determined) entry of the pair.
    SpImport {
        import: ImportRef,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        partner: Option<Cell>,
    },
    /// The rest of the agent's row is determined.
    AgentComplement,
    /// The rest of the house's column is determined, apart from `shared`
    /// entries that ETA makes equal to this one.
    HouseComplement {
        #[serde(skip_serializing_if = "Vec::is_empty", default)]
        shared: Vec<Cell>,
    },
    /// Pinned only by the full linear system `systems[system]`.
    SolvedJointly { system: usize },
}

impl Reason {
    pub fn tag(&self) -> &'static str {
        match self {
            Reason::Efficiency => "Efficiency",
            Reason::Eta { .. } => "Eta",
            Reason::SpImport { .. } => "SpImport",
            Reason::AgentComplement => "AgentComplement",
            Reason::HouseComplement { .. } => "HouseComplement",
            Reason::SolvedJointly { .. } => "SolvedJointly",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Step {
    pub cell: Cell,
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub round: u32,
    #[serde(flatten)]
    pub reason: Reason,
}

/// The imports a joint solve used. Own entries known at that point of the
/// replay are added implicitly.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct JointSystem {
    pub round: u32,
    pub imports: Vec<ImportRef>,
    /// The `[0,1]` bounds were needed, not just the equalities.
    pub box_probe: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DeterminationCertificate {
    pub profile: Profile,
    pub steps: Vec<Step>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub systems: Vec<JointSystem>,
    pub final_matrix: AssignmentMatrix,
}

impl DeterminationCertificate {
    /// The same certificate for the renamed profile.
    pub fn renamed(&self, r: &Renaming) -> DeterminationCertificate {
        let cell = |c: Cell| Cell::new(r.agents[c.agent], r.house(c.house));
        let import = |imp: &ImportRef| ImportRef {
            source: r.apply(&imp.source),
            swap: crate::prefs::AdjacentSwap::new(r.agents[imp.swap.agent], imp.swap.position),
            level: imp.level,
            round: imp.round,
            cells: match &imp.cells {
                ImportCells::Entry { cell: c } => ImportCells::Entry { cell: cell(*c) },
                ImportCells::PairSum { cells } => ImportCells::PairSum {
                    cells: [cell(cells[0]), cell(cells[1])],
                },
            },
            value: imp.value.clone(),
        };
        let reason = |reason: &Reason| match reason {
            Reason::Efficiency => Reason::Efficiency,
            Reason::Eta { partner } => Reason::Eta {
                partner: cell(*partner),
            },
            Reason::SpImport { import: imp, partner } => Reason::SpImport {
                import: import(imp),
                partner: partner.map(cell),
            },
            Reason::AgentComplement => Reason::AgentComplement,
            Reason::HouseComplement { shared } => Reason::HouseComplement {
                shared: shared.iter().map(|c| cell(*c)).collect(),
            },
            Reason::SolvedJointly { system } => Reason::SolvedJointly { system: *system },
        };
        DeterminationCertificate {
            profile: r.apply(&self.profile),
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    cell: cell(s.cell),
                    value: s.value.clone(),
                    round: s.round,
                    reason: reason(&s.reason),
                })
                .collect(),
            systems: self
                .systems
                .iter()
                .map(|j| JointSystem {
                    round: j.round,
                    imports: j.imports.iter().map(import).collect(),
                    box_probe: j.box_probe,
                })
                .collect(),
            final_matrix: self.final_matrix.renamed(r),
        }
    }

    pub fn tag_of(&self, c: Cell) -> Option<&'static str> {
        self.steps.iter().find(|s| s.cell == c).map(|s| s.reason.tag())
    }
}

fn same_class(classes: &[Vec<Cell>], a: Cell, b: Cell) -> bool {
    classes.iter().any(|c| c.contains(&a) && c.contains(&b))
}

/// Derives `cell` by one of the simple rules from the entries in `known`.
fn simple_rule(
    cell: Cell,
    cs: &ConstraintSystem,
    classes: &[Vec<Cell>],
    known: &[Option<Rational>],
    n: usize,
    m: usize,
    rule: usize,
) -> Option<(Reason, Rational)> {
    let get = |c: Cell| known[c.index(m)].as_ref();
    match rule {
        0 => cs.forced_zero(cell).then(|| (Reason::Efficiency, Rational::zero())),
        1 => cs.imports.iter().find_map(|imp| match &imp.cells {
            ImportCells::Entry { cell: c } if *c == cell => Some((
                Reason::SpImport {
                    import: imp.clone(),
                    partner: None,
                },
                imp.value.clone(),
            )),
            _ => None,
        }),
        2 => cs.imports.iter().find_map(|imp| match &imp.cells {
            ImportCells::PairSum { cells } if cells.contains(&cell) => {
                let partner = if cells[0] == cell { cells[1] } else { cells[0] };
                get(partner).map(|v| {
                    (
                        Reason::SpImport {
                            import: imp.clone(),
                            partner: Some(partner),
                        },
                        &imp.value - v,
                    )
                })
            }
            _ => None,
        }),
        3 => classes.iter().find_map(|class| {
            if !class.contains(&cell) {
                return None;
            }
            class
                .iter()
                .find_map(|&c| get(c).map(|v| (Reason::Eta { partner: c }, v.clone())))
        }),
        4 => {
            let others: Option<Vec<&Rational>> = House::all(m)
                .filter(|&h| h != cell.house)
                .map(|h| get(Cell::new(cell.agent, h)))
                .collect();
            others.map(|o| {
                (
                    Reason::AgentComplement,
                    Rational::one() - o.into_iter().sum::<Rational>(),
                )
            })
        }
        5 if n == m => {
            let mut shared = Vec::new();
            let mut sum = Rational::zero();
            for i in (0..n).filter(|&i| i != cell.agent) {
                let c = Cell::new(i, cell.house);
                match get(c) {
                    Some(v) => sum += v,
                    None if same_class(classes, cell, c) => shared.push(c),
                    None => return None,
                }
            }
            let count = Rational::from_integer((shared.len() + 1).into());
            Some((Reason::HouseComplement { shared }, (Rational::one() - sum) / count))
        }
        _ => None,
    }
}

const RULES: usize = 6;

/// Explains the entries of `pinned` that are not yet in `cs.own`, cheapest
/// rule first. Entries no simple rule reaches are attributed to a joint
/// system, which is appended to `systems`.
pub(crate) fn explain(
    cs: &ConstraintSystem,
    pinned: &[Option<Rational>],
    round: u32,
    box_probe: bool,
    systems: &mut Vec<JointSystem>,
) -> Vec<Step> {
    let (n, m) = (cs.profile.n(), cs.profile.m());
    let classes: Vec<Vec<Cell>> = cs.eta_classes().map(<[Cell]>::to_vec).collect();
    let mut known = cs.own.clone();
    let mut steps = Vec::new();
    let targets: Vec<Cell> = (0..n * m)
        .filter(|&k| known[k].is_none() && pinned[k].is_some())
        .map(|k| Cell::from_index(k, m))
        .collect();
    'outer: loop {
        for rule in 0..RULES {
            for &cell in &targets {
                if known[cell.index(m)].is_some() {
                    continue;
                }
                if let Some((reason, value)) = simple_rule(cell, cs, &classes, &known, n, m, rule) {
                    assert_eq!(
                        Some(&value),
                        pinned[cell.index(m)].as_ref(),
                        "rule {} disagrees with the solver at {cell} of {}",
                        reason.tag(),
                        cs.profile
                    );
                    // the other shared entries follow by ETA on the next pass
                    known[cell.index(m)] = Some(value.clone());
                    steps.push(Step {
                        cell,
                        value,
                        round,
                        reason,
                    });
                    continue 'outer;
                }
            }
        }
        break;
    }
    let rest: Vec<Cell> = targets.into_iter().filter(|c| known[c.index(m)].is_none()).collect();
    if !rest.is_empty() {
        let system = systems.len();
        systems.push(JointSystem {
            round,
            imports: cs.imports.clone(),
            box_probe,
        });
        for cell in rest {
            steps.push(Step {
                cell,
                value: pinned[cell.index(m)].clone().expect("pinned"),
                round,
                reason: Reason::SolvedJointly { system },
            });
        }
    }
    steps
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayError(pub String);

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ReplayError {}

fn fail<T>(msg: impl Into<String>) -> Result<T, ReplayError> {
    Err(ReplayError(msg.into()))
}

/// Checks an import against the source database: the source is the cited
/// swap of `p`, its level is its disagreement parameter, and the cited
/// entries were determined in the recorded round, before `round`.
fn check_import(p: &Profile, imp: &ImportRef, round: u32, db: &dyn SourceLookup) -> Result<(), ReplayError> {
    let expected = apply_swap(p, imp.swap).map_err(|e| ReplayError(format!("bad swap {:?}: {e}", imp.swap)))?;
    if expected != imp.source {
        return fail(format!("{} is not the swap {:?} of {p}", imp.source, imp.swap));
    }
    let level = imp.source.disagreement_parameter();
    if level != imp.level {
        return fail(format!(
            "import from {} records level {} but its disagreement parameter is {level}",
            imp.source, imp.level
        ));
    }
    let Some(known) = db.known(&imp.source) else {
        return fail(format!("dangling import: source {} is unknown", imp.source));
    };
    let (x, y) = imp.swap.houses(p);
    let m = p.m();
    let cells: Vec<Cell> = match &imp.cells {
        ImportCells::Entry { cell } => {
            if cell.agent != imp.swap.agent || cell.house == x || cell.house == y {
                return fail(format!("{cell} cannot be imported across {:?}", imp.swap));
            }
            vec![*cell]
        }
        ImportCells::PairSum { cells } => {
            if *cells != [Cell::new(imp.swap.agent, x), Cell::new(imp.swap.agent, y)] {
                return fail(format!("pair {:?} is not the swapped pair of {:?}", cells, imp.swap));
            }
            cells.to_vec()
        }
    };
    let mut value = Rational::zero();
    let mut latest = 0;
    for c in cells {
        let Some(k) = &known[c.index(m)] else {
            return fail(format!("dangling import: {c} of {} is not determined", imp.source));
        };
        value += &k.value;
        latest = latest.max(k.round);
    }
    if latest != imp.round {
        return fail(format!(
            "import from {} records round {} but the entries date from round {latest}",
            imp.source, imp.round
        ));
    }
    if latest >= round {
        return fail(format!(
            "import from {} (round {latest}) is not earlier than the citing round {round}",
            imp.source
        ));
    }
    if value != imp.value {
        return fail(format!(
            "import from {} records {} but the source holds {value}",
            imp.source, imp.value
        ));
    }
    Ok(())
}

/// Replays `c` step by step against `db`, which supplies the cited source
/// profiles. Succeeds iff every step is justified, the result equals
/// `final_matrix` and that matrix is a valid assignment matrix.
pub fn replay_certificate(c: &DeterminationCertificate, db: &dyn SourceLookup) -> Result<(), ReplayError> {
    let p = &c.profile;
    let (n, m) = (p.n(), p.m());
    if c.final_matrix.n() != n || c.final_matrix.m() != m {
        return fail("final matrix has the wrong shape");
    }
    let forced = analyze_efficiency(p).map_err(|e| ReplayError(e.to_string()))?;
    let classes: Vec<Vec<Cell>> = eta_constraints(p)
        .into_iter()
        .filter_map(|c| match c {
            AxiomConstraint::Equality { cells, .. } => Some(cells),
            _ => None,
        })
        .collect();
    let mut state: Vec<Option<Rational>> = vec![None; n * m];
    let mut last_round = 0;
    for (k, step) in c.steps.iter().enumerate() {
        let cell = step.cell;
        let at = |msg: String| ReplayError(format!("step {k} {cell} ({}): {msg}", step.reason.tag()));
        if cell.agent >= n || cell.house.index() >= m {
            return Err(at("cell out of range".into()));
        }
        if state[cell.index(m)].is_some() {
            return Err(at("entry determined twice".into()));
        }
        if step.round < last_round {
            return Err(at("rounds go backwards".into()));
        }
        last_round = step.round;
        let get = |c: Cell| state[c.index(m)].as_ref();
        let value = match &step.reason {
            Reason::Efficiency => {
                if !forced.is_forced_zero(cell.agent, cell.house) {
                    return Err(at("not a forced zero".into()));
                }
                Rational::zero()
            }
            Reason::Eta { partner } => {
                if !same_class(&classes, cell, *partner) {
                    return Err(at(format!("{partner} is not in the same ETA class")));
                }
                get(*partner)
                    .cloned()
                    .ok_or_else(|| at(format!("{partner} is not yet determined")))?
            }
            Reason::SpImport { import, partner } => {
                check_import(p, import, step.round, db).map_err(|e| at(e.0))?;
                match (&import.cells, partner) {
                    (ImportCells::Entry { cell: c }, None) if *c == cell => import.value.clone(),
                    (ImportCells::PairSum { cells }, Some(other))
                        if cells.contains(&cell) && cells.contains(other) && *other != cell =>
                    {
                        let v = get(*other).ok_or_else(|| at(format!("{other} is not yet determined")))?;
                        &import.value - v
                    }
                    _ => return Err(at("import does not cover this entry".into())),
                }
            }
            Reason::AgentComplement => {
                let mut sum = Rational::zero();
                for h in House::all(m).filter(|&h| h != cell.house) {
                    sum += get(Cell::new(cell.agent, h)).ok_or_else(|| at("row not complete".into()))?;
                }
                Rational::one() - sum
            }
            Reason::HouseComplement { shared } => {
                if n != m {
                    return Err(at("column sums are fixed only when n = m".into()));
                }
                let mut sum = Rational::zero();
                for i in (0..n).filter(|&i| i != cell.agent) {
                    let other = Cell::new(i, cell.house);
                    if shared.contains(&other) {
                        if get(other).is_some() || !same_class(&classes, cell, other) {
                            return Err(at(format!("{other} cannot be shared")));
                        }
                    } else {
                        sum += get(other).ok_or_else(|| at("column not complete".into()))?;
                    }
                }
                if shared.iter().any(|s| s.house != cell.house || s.agent == cell.agent) {
                    return Err(at("shared entry outside the column".into()));
                }
                (Rational::one() - sum) / Rational::from_integer((shared.len() + 1).into())
            }
            Reason::SolvedJointly { system } => {
                let js = c
                    .systems
                    .get(*system)
                    .ok_or_else(|| at(format!("no system {system}")))?;
                if js.round != step.round {
                    return Err(at("system round differs from step round".into()));
                }
                for imp in &js.imports {
                    check_import(p, imp, step.round, db).map_err(|e| at(e.0))?;
                }
                let (_, sys) = assemble(p, &state, &js.imports).map_err(|e| at(e.to_string()))?;
                let reduced = sys.reduce().ok_or_else(|| at("joint system is inconsistent".into()))?;
                let pinned = if js.box_probe {
                    reduced
                        .box_pinned()
                        .ok_or_else(|| at("joint system misses the box".into()))?
                } else {
                    reduced.pinned()
                };
                pinned[cell.index(m)]
                    .clone()
                    .ok_or_else(|| at("joint system does not pin this entry".into()))?
            }
        };
        if value != step.value {
            return Err(at(format!("replay gives {value}, certificate records {}", step.value)));
        }
        state[cell.index(m)] = Some(value);
    }
    for k in 0..n * m {
        let cell = Cell::from_index(k, m);
        match &state[k] {
            None => return fail(format!("{cell} is never determined")),
            Some(v) if v != c.final_matrix.at(cell) => {
                return fail(format!(
                    "{cell}: replay gives {v}, final matrix has {}",
                    c.final_matrix.at(cell)
                ))
            }
            _ => {}
        }
    }
    c.final_matrix.validate().map_err(|e| ReplayError(e.to_string()))
}
