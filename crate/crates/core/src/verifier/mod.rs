//! The determination engine.
//!
//! All canonical profiles are processed in synchronous rounds. In round `r`
//! every open profile assembles its constraint system from entries
//! determined in rounds `< r` (its own and its neighbours') and records the
//! entries that system pins. When a round pins nothing, one round also uses
//! the `[0,1]` bounds; the run ends when a bounded round pins nothing either.
//! Because every profile reads the same snapshot, the result does not
//! depend on scheduling.

mod certificate;
mod constraints;
mod universe;

use std::io::{self, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::axioms::{is_degenerate, is_near_unanimous, is_supported_profile};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::mechanisms::{rsd, AssignmentMatrix, Cell};
use crate::prefs::{canonicalize, Profile};

pub use certificate::{replay_certificate, DeterminationCertificate, JointSystem, Reason, ReplayError, Step};
pub use constraints::{
    available_imports, build_constraints, ConstraintSystem, ImportCells, ImportRef, KnowledgeDb, Known, KnownMatrix,
    SourceLookup,
};
pub use universe::{Universe, MAX_VERIFY_SIZE};

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind")]
pub enum Outcome {
    UniqueEqualsRSD,
    UniqueDiffersFromRSD { matrix: AssignmentMatrix },
    Underdetermined { dimension: usize },
    Infeasible,
}

impl Outcome {
    pub fn is_unique_rsd(&self) -> bool {
        matches!(self, Outcome::UniqueEqualsRSD)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileRecord {
    pub profile: Profile,
    #[serde(rename = "D")]
    pub level: u32,
    pub orbit_size: u64,
    /// Only defined for four agents.
    pub supported: Option<bool>,
    pub near_unanimous: bool,
    pub degenerate: bool,
    pub outcome: Outcome,
    pub matrix: Option<AssignmentMatrix>,
    pub certificate: Option<DeterminationCertificate>,
    /// Round in which the last entry was determined (0 if none was).
    pub round: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelSummary {
    pub level: u32,
    pub profiles: usize,
    pub orbit_profiles: u64,
    pub unique: usize,
    pub differs: usize,
    pub underdetermined: usize,
    pub infeasible: usize,
    pub max_round: u32,
}

/// Overall result, ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    AllEqualRsd,
    SomeUnderdetermined,
    SomeInfeasibleOrDiffers,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundStats {
    pub round: u32,
    pub box_probe: bool,
    pub new_entries: usize,
    pub complete_profiles: usize,
    pub total_profiles: usize,
}

#[derive(Default)]
pub struct VerifyOptions<'a> {
    pub progress: Option<&'a (dyn Fn(&RoundStats) + Sync)>,
}

pub struct VerificationReport {
    n: usize,
    m: usize,
    rounds: u32,
    records: Vec<ProfileRecord>,
    db: KnowledgeDb,
}

impl VerificationReport {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of rounds run, including unproductive ones.
    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn records(&self) -> &[ProfileRecord] {
        &self.records
    }

    /// Determined entries of every profile, for replaying certificates.
    pub fn database(&self) -> &KnowledgeDb {
        &self.db
    }

    pub fn record_for(&self, p: &Profile) -> Option<&ProfileRecord> {
        let rep = canonicalize(p).representative;
        self.db.universe().index_of(&rep).map(|k| &self.records[k])
    }

    /// The certificate of any profile, obtained from its representative's.
    pub fn certificate_for(&self, p: &Profile) -> Result<DeterminationCertificate> {
        let form = canonicalize(p);
        let cert = self
            .db
            .universe()
            .index_of(&form.representative)
            .and_then(|k| self.records[k].certificate.as_ref())
            .ok_or_else(|| Error::NotDetermined(p.to_string()))?;
        Ok(cert.renamed(&form.renaming().inverse()))
    }

    pub fn verdict(&self) -> Verdict {
        self.records
            .iter()
            .map(|r| match r.outcome {
                Outcome::UniqueEqualsRSD => Verdict::AllEqualRsd,
                Outcome::Underdetermined { .. } => Verdict::SomeUnderdetermined,
                _ => Verdict::SomeInfeasibleOrDiffers,
            })
            .max()
            .unwrap_or(Verdict::AllEqualRsd)
    }

    pub fn summary(&self) -> Vec<LevelSummary> {
        let mut out: Vec<LevelSummary> = Vec::new();
        for r in &self.records {
            if out.last().is_none_or(|s| s.level != r.level) {
                out.push(LevelSummary {
                    level: r.level,
                    profiles: 0,
                    orbit_profiles: 0,
                    unique: 0,
                    differs: 0,
                    underdetermined: 0,
                    infeasible: 0,
                    max_round: 0,
                });
            }
            let s = out.last_mut().expect("pushed above");
            s.profiles += 1;
            s.orbit_profiles += r.orbit_size;
            match r.outcome {
                Outcome::UniqueEqualsRSD => s.unique += 1,
                Outcome::UniqueDiffersFromRSD { .. } => s.differs += 1,
                Outcome::Underdetermined { .. } => s.underdetermined += 1,
                Outcome::Infeasible => s.infeasible += 1,
            }
            s.max_round = s.max_round.max(r.round);
        }
        out
    }

    /// One JSON object per canonical profile, in `(D, profile)` order.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "level,profiles,orbit_profiles,unique,differs,underdetermined,infeasible,max_round"
        )?;
        for s in self.summary() {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                s.level,
                s.profiles,
                s.orbit_profiles,
                s.unique,
                s.differs,
                s.underdetermined,
                s.infeasible,
                s.max_round
            )?;
        }
        w.flush()
    }
}

impl Serialize for VerificationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.records.serialize(serializer)
    }
}

#[derive(Clone, Default)]
struct ProfileState {
    steps: Vec<Step>,
    systems: Vec<JointSystem>,
    infeasible: bool,
}

enum RoundResult {
    Infeasible,
    Progress {
        steps: Vec<Step>,
        systems: Vec<JointSystem>,
    },
}

fn process(db: &KnowledgeDb, k: usize, round: u32, box_probe: bool) -> Result<RoundResult> {
    let p = db.universe().profile(k);
    let cs = build_constraints(p, db, round)?;
    let Some(reduced) = cs.system.reduce() else {
        return Ok(RoundResult::Infeasible);
    };
    let pinned = if box_probe {
        match reduced.box_pinned() {
            Some(v) => v,
            None => return Ok(RoundResult::Infeasible),
        }
    } else {
        reduced.pinned()
    };
    let mut systems = Vec::new();
    let steps = certificate::explain(&cs, &pinned, round, box_probe, &mut systems);
    Ok(RoundResult::Progress { steps, systems })
}

fn is_complete(known: &KnownMatrix) -> bool {
    known.iter().all(Option::is_some)
}

pub fn verify_theorem(n: usize, m: usize) -> Result<VerificationReport> {
    verify_with(n, m, &VerifyOptions::default())
}

pub fn verify_with(n: usize, m: usize, options: &VerifyOptions<'_>) -> Result<VerificationReport> {
    let universe = Arc::new(Universe::build(n, m)?);
    let total = universe.len();
    let mut db = KnowledgeDb::empty(universe.clone());
    let mut states = vec![ProfileState::default(); total];
    let mut round = 0;
    let mut box_probe = false;
    loop {
        let open: Vec<usize> = (0..total)
            .filter(|&k| !states[k].infeasible && !is_complete(db.representative(k)))
            .collect();
        if open.is_empty() {
            break;
        }
        round += 1;
        let results: Vec<(usize, RoundResult)> = open
            .par_iter()
            .map(|&k| process(&db, k, round, box_probe).map(|r| (k, r)))
            .collect::<Result<_>>()?;
        let mut new_entries = 0;
        for (k, result) in results {
            match result {
                RoundResult::Infeasible => states[k].infeasible = true,
                RoundResult::Progress { steps, systems } => {
                    let base = states[k].systems.len();
                    states[k].systems.extend(systems);
                    for mut step in steps {
                        if let Reason::SolvedJointly { system } = &mut step.reason {
                            *system += base;
                        }
                        db.set(
                            k,
                            step.cell,
                            Known {
                                value: step.value.clone(),
                                round,
                            },
                        );
                        states[k].steps.push(step);
                        new_entries += 1;
                    }
                }
            }
        }
        if let Some(progress) = options.progress {
            progress(&RoundStats {
                round,
                box_probe,
                new_entries,
                complete_profiles: (0..total).filter(|&k| is_complete(db.representative(k))).count(),
                total_profiles: total,
            });
        }
        if new_entries == 0 {
            if box_probe {
                break;
            }
            box_probe = true;
        } else {
            box_probe = false;
        }
    }
    let records = states
        .into_par_iter()
        .enumerate()
        .map(|(k, state)| finish(&db, k, state))
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport {
        n,
        m,
        rounds: round,
        records,
        db,
    })
}

fn finish(db: &KnowledgeDb, k: usize, state: ProfileState) -> Result<ProfileRecord> {
    let universe = db.universe();
    let p = universe.profile(k).clone();
    let (n, m) = (p.n(), p.m());
    let known = db.representative(k);
    let round = state.steps.iter().map(|s| s.round).max().unwrap_or(0);
    let (outcome, matrix, certificate) = if is_complete(known) {
        let entries: Vec<Rational> = known
            .iter()
            .map(|e| e.as_ref().expect("complete").value.clone())
            .collect();
        let matrix = AssignmentMatrix::from_fn(n, m, |i, h| entries[Cell::new(i, h).index(m)].clone());
        let outcome = if matrix == rsd(&p)? {
            Outcome::UniqueEqualsRSD
        } else {
            Outcome::UniqueDiffersFromRSD { matrix: matrix.clone() }
        };
        let cert = DeterminationCertificate {
            profile: p.clone(),
            steps: state.steps,
            systems: state.systems,
            final_matrix: matrix.clone(),
        };
        (outcome, Some(matrix), Some(cert))
    } else if state.infeasible {
        (Outcome::Infeasible, None, None)
    } else {
        let cs = build_constraints(&p, db, u32::MAX)?;
        let outcome = match cs.system.reduce() {
            Some(r) => Outcome::Underdetermined {
                dimension: r.dimension(),
            },
            None => Outcome::Infeasible,
        };
        (outcome, None, None)
    };
    Ok(ProfileRecord {
        level: universe.level(k),
        orbit_size: universe.orbit_size(k),
        supported: if n == 4 { Some(is_supported_profile(&p)?) } else { None },
        near_unanimous: is_near_unanimous(&p),
        degenerate: is_degenerate(&p),
        outcome,
        matrix,
        certificate,
        round,
        profile: p,
    })
}

/// The determination certificate of `p` from a finished run.
pub fn certify(p: &Profile, report: &VerificationReport) -> Result<DeterminationCertificate> {
    report.certificate_for(p)
}
