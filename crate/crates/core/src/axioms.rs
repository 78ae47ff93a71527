//! Constraints the axioms impose on a single profile, and the structural
//! predicates (supportedness, near-unanimity, degeneracy) used to classify
//! profiles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::efficiency::{analyze_efficiency, EfficiencyProfileAnalysis};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::mechanisms::Cell;
use crate::prefs::{all_swaps, apply_swap, AdjacentSwap, House, Profile, Ranking};

/// Where an imported value comes from: the neighbouring profile reached by
/// `swap`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Profile,
    pub swap: AdjacentSwap,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AxiomConstraint {
    ForcedZero(Cell),
    /// All listed cells share one (unknown) value.
    Equality {
        house: House,
        cells: Vec<Cell>,
    },
    PinnedValue {
        cell: Cell,
        value: Rational,
        provenance: Provenance,
    },
    SumPin {
        cells: [Cell; 2],
        value: Rational,
        provenance: Provenance,
    },
}

/// Equal treatment: two agents whose rankings agree, in order, on
/// everything above `h` receive `h` with the same probability.
///
/// Agents with identical rankings therefore get identical rows. Output is
/// sorted by house, then by the least agent in each group.
pub fn eta_constraints(p: &Profile) -> Vec<AxiomConstraint> {
    let mut out = Vec::new();
    for h in House::all(p.m()) {
        let mut groups: BTreeMap<&[House], Vec<Cell>> = BTreeMap::new();
        for i in 0..p.n() {
            groups
                .entry(p.ranking(i).prefix_above(h))
                .or_default()
                .push(Cell::new(i, h));
        }
        let mut classes: Vec<Vec<Cell>> = groups.into_values().filter(|c| c.len() > 1).collect();
        classes.sort_by_key(|c| c[0].agent);
        out.extend(
            classes
                .into_iter()
                .map(|cells| AxiomConstraint::Equality { house: h, cells }),
        );
    }
    out
}

/// Every single-swap neighbour of `p`, agent-major.
pub fn sp_links(p: &Profile) -> Vec<(AdjacentSwap, Profile)> {
    all_swaps(p.n(), p.m())
        .map(|s| (s, apply_swap(p, s).expect("swap in range")))
        .collect()
}

pub type Pair = (House, House);

/// Requirements two supported agents place on the remaining two agents.
///
/// Index 0 and 1 refer to the two designated agents.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SupportRequirements {
    /// `base[i][(x,y)]`: how many of the other two agents must prefer `x`
    /// to `y`, for each adjacent pair `x` immediately above `y` in ranking `i`.
    pub base: [BTreeMap<Pair, u8>; 2],
    pub relaxations: [Option<Pair>; 2],
    pub relaxed: [BTreeMap<Pair, u8>; 2],
    /// Pointwise maximum of the relaxed requirements.
    pub combined: BTreeMap<Pair, u8>,
}

pub fn support_requirements(
    p1: &Ranking,
    p2: &Ranking,
    l1: Option<Pair>,
    l2: Option<Pair>,
) -> Result<SupportRequirements> {
    let rankings = [p1, p2];
    let relaxations = [l1, l2];
    let mut base: [BTreeMap<Pair, u8>; 2] = Default::default();
    for i in 0..2 {
        let other = rankings[1 - i];
        for (x, y) in rankings[i].adjacent_pairs() {
            let need = if other.position(x) < other.position(y) { 1 } else { 2 };
            base[i].insert((x, y), need);
        }
        if let Some((x, y)) = relaxations[i] {
            if !base[i].contains_key(&(x, y)) {
                return Err(Error::InvalidRelaxation {
                    x: x.letter(),
                    y: y.letter(),
                });
            }
        }
    }
    let mut relaxed = base.clone();
    for i in 0..2 {
        if let Some(pair) = relaxations[i] {
            let v = relaxed[i].get_mut(&pair).expect("checked above");
            *v -= 1;
        }
    }
    let mut combined = BTreeMap::new();
    for r in &relaxed {
        for (&pair, &v) in r {
            let e = combined.entry(pair).or_insert(0);
            *e = (*e).max(v);
        }
    }
    Ok(SupportRequirements {
        base,
        relaxations,
        relaxed,
        combined,
    })
}

/// Outcome of the supportedness test for one agent.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct AgentSupport {
    pub supported: bool,
    /// The relaxation that makes the agent supported, if one is needed.
    pub relaxation: Option<Pair>,
    /// Adjacent pairs (in the agent's order) that cannot be satisfied.
    pub blocking: Vec<Pair>,
}

fn check_four(p: &Profile) -> Result<()> {
    if p.n() != 4 {
        return Err(Error::SupportNeedsFourAgents(p.n()));
    }
    Ok(())
}

/// Every adjacent comparison of agent `i` has at least two other agents
/// agreeing, except that one comparison whose houses are both efficient for
/// `i` may get by with one.
pub fn analyze_support(p: &Profile, i: usize, eff: &EfficiencyProfileAnalysis) -> Result<AgentSupport> {
    check_four(p)?;
    if i >= p.n() {
        return Err(Error::AgentOutOfRange { agent: i, n: p.n() });
    }
    let mut hard = Vec::new();
    let mut short = Vec::new();
    for (x, y) in p.ranking(i).adjacent_pairs() {
        let agree = (0..p.n())
            .filter(|&j| j != i && p.ranking(j).position(x) < p.ranking(j).position(y))
            .count();
        match agree {
            0 => hard.push((x, y)),
            1 if eff.agent_house_efficient(i, x) && eff.agent_house_efficient(i, y) => short.push((x, y)),
            1 => hard.push((x, y)),
            _ => {}
        }
    }
    Ok(if hard.is_empty() && short.len() <= 1 {
        AgentSupport {
            supported: true,
            relaxation: short.first().copied(),
            blocking: Vec::new(),
        }
    } else {
        let mut blocking = if hard.is_empty() { short } else { hard };
        let order = p.ranking(i);
        blocking.sort_by_key(|(x, _)| order.position(*x));
        AgentSupport {
            supported: false,
            relaxation: None,
            blocking,
        }
    })
}

pub fn is_supported_agent(p: &Profile, i: usize) -> Result<bool> {
    check_four(p)?;
    Ok(analyze_support(p, i, &analyze_efficiency(p)?)?.supported)
}

/// At least two supported agents hold different rankings.
pub fn is_supported_profile(p: &Profile) -> Result<bool> {
    check_four(p)?;
    let eff = analyze_efficiency(p)?;
    let mut supported: Vec<&Ranking> = Vec::new();
    for i in 0..p.n() {
        if analyze_support(p, i, &eff)?.supported {
            supported.push(p.ranking(i));
        }
    }
    Ok(supported.iter().any(|r| *r != supported[0]))
}

/// Every pair of houses is ordered the same way by at least `n - 1` agents.
pub fn is_near_unanimous(p: &Profile) -> bool {
    let n = p.n();
    let houses: Vec<House> = House::all(p.m()).collect();
    houses.iter().enumerate().all(|(k, &x)| {
        houses[k + 1..].iter().all(|&y| {
            let xy = p.rankings().iter().filter(|r| r.position(x) < r.position(y)).count();
            xy + 1 >= n || (n - xy) + 1 >= n
        })
    })
}

/// Every agent ranks a different house first.
pub fn is_degenerate(p: &Profile) -> bool {
    let mut tops: Vec<House> = p.rankings().iter().map(Ranking::top).collect();
    tops.sort_unstable();
    tops.windows(2).all(|w| w[0] != w[1])
}
