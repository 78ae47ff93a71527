//! Pareto efficiency of deterministic assignments and the zeros it forces on
//! any ex-post efficient assignment matrix.

use crate::error::{Error, Result};
use crate::exact::feasible_combination;
use crate::mechanisms::AssignmentMatrix;
use crate::prefs::{House, Profile, MAX_HOUSES};

/// Agent `i` receives `houses[i]`; no house is given twice.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct DeterministicAssignment {
    houses: Vec<House>,
}

impl DeterministicAssignment {
    pub fn new(houses: Vec<House>) -> Result<Self> {
        let mut seen = [false; MAX_HOUSES];
        for h in &houses {
            if seen[h.index()] {
                return Err(Error::NotInjective(h.letter()));
            }
            seen[h.index()] = true;
        }
        Ok(DeterministicAssignment { houses })
    }

    pub fn house_of(&self, agent: usize) -> House {
        self.houses[agent]
    }

    pub fn houses(&self) -> &[House] {
        &self.houses
    }

    pub fn n(&self) -> usize {
        self.houses.len()
    }

    /// 0/1 matrix with a one at `(i, houses[i])`.
    pub fn indicator(&self, m: usize) -> Vec<Vec<bool>> {
        self.houses
            .iter()
            .map(|h| (0..m).map(|k| k == h.index()).collect())
            .collect()
    }
}

/// No group of agents can trade (or grab a free house) so that someone is
/// strictly better off and nobody worse off.
///
/// With strict preferences this holds iff the envy graph (`i → j` when `i`
/// prefers `j`'s house to his own) is acyclic and no agent prefers an
/// unassigned house.
pub fn is_pareto_efficient(a: &DeterministicAssignment, p: &Profile) -> Result<bool> {
    let n = p.n();
    let m = p.m();
    if a.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} agents, profile has {n}",
            a.n()
        )));
    }
    if let Some(h) = a.houses.iter().find(|h| h.index() >= m) {
        return Err(Error::HouseOutOfRange { house: h.index(), m });
    }
    let own_rank: Vec<usize> = (0..n).map(|i| p.ranking(i).position(a.house_of(i))).collect();
    let mut taken = [false; MAX_HOUSES];
    for h in &a.houses {
        taken[h.index()] = true;
    }
    for i in 0..n {
        if p.ranking(i).houses()[..own_rank[i]].iter().any(|h| !taken[h.index()]) {
            return Ok(false);
        }
    }
    let envies = |i: usize, j: usize| i != j && p.ranking(i).position(a.house_of(j)) < own_rank[i];
    // iterative removal of sinks; a cycle exists iff something survives
    let mut alive = vec![true; n];
    loop {
        let sink = (0..n).find(|&i| alive[i] && !(0..n).any(|j| alive[j] && envies(i, j)));
        match sink {
            Some(i) => alive[i] = false,
            None => break,
        }
    }
    Ok(!alive.iter().any(|&x| x))
}

/// Every injective map from `n` agents into `m` houses, in lexicographic order.
pub fn injective_assignments(n: usize, m: usize) -> Vec<DeterministicAssignment> {
    fn extend(
        prefix: &mut Vec<House>,
        n: usize,
        m: usize,
        used: &mut [bool; MAX_HOUSES],
        out: &mut Vec<DeterministicAssignment>,
    ) {
        if prefix.len() == n {
            out.push(DeterministicAssignment { houses: prefix.clone() });
            return;
        }
        for h in House::all(m) {
            if !used[h.index()] {
                used[h.index()] = true;
                prefix.push(h);
                extend(prefix, n, m, used, out);
                prefix.pop();
                used[h.index()] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(n), n, m, &mut [false; MAX_HOUSES], &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EfficiencyProfileAnalysis {
    pub efficient_set: Vec<DeterministicAssignment>,
    /// `forced_zero[i][h]`: no efficient assignment gives `h` to `i`.
    pub forced_zero: Vec<Vec<bool>>,
}

impl EfficiencyProfileAnalysis {
    pub fn is_forced_zero(&self, agent: usize, h: House) -> bool {
        self.forced_zero[agent][h.index()]
    }

    /// Some efficient assignment gives `h` to `agent`.
    pub fn agent_house_efficient(&self, agent: usize, h: House) -> bool {
        !self.is_forced_zero(agent, h)
    }

    pub fn forced_zero_cells(&self) -> Vec<(usize, House)> {
        let mut out = Vec::new();
        for (i, row) in self.forced_zero.iter().enumerate() {
            for (h, &z) in row.iter().enumerate() {
                if z {
                    out.push((i, House::new(h).expect("in range")));
                }
            }
        }
        out
    }
}

pub fn analyze_efficiency(p: &Profile) -> Result<EfficiencyProfileAnalysis> {
    let n = p.n();
    let m = p.m();
    if n > m {
        return Err(Error::MoreAgentsThanHouses { n, m });
    }
    let mut efficient_set = Vec::new();
    let mut forced_zero = vec![vec![true; m]; n];
    for a in injective_assignments(n, m) {
        if is_pareto_efficient(&a, p)? {
            for (i, h) in a.houses.iter().enumerate() {
                forced_zero[i][h.index()] = false;
            }
            efficient_set.push(a);
        }
    }
    Ok(EfficiencyProfileAnalysis {
        efficient_set,
        forced_zero,
    })
}

/// The matrix is a convex combination of Pareto-efficient deterministic
/// assignments.
pub fn is_expost_efficient(matrix: &AssignmentMatrix, p: &Profile) -> Result<bool> {
    if matrix.n() != p.n() || matrix.m() != p.m() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for a {}x{} profile",
            matrix.n(),
            matrix.m(),
            p.n(),
            p.m()
        )));
    }
    let analysis = analyze_efficiency(p)?;
    for (i, h) in analysis.forced_zero_cells() {
        if !num_traits::Zero::is_zero(matrix.get(i, h)) {
            return Ok(false);
        }
    }
    let vertices: Vec<Vec<Vec<bool>>> = analysis.efficient_set.iter().map(|a| a.indicator(p.m())).collect();
    Ok(feasible_combination(&matrix.rows(), &vertices)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;
    use crate::mechanisms::serial_dictatorship;
    use crate::prefs::permutations;

    fn p(s: &str) -> Profile {
        s.parse().unwrap()
    }

    fn h(c: char) -> House {
        House::from_letter(c).unwrap()
    }

    fn assign(s: &str) -> DeterministicAssignment {
        DeterministicAssignment::new(s.chars().map(h).collect()).unwrap()
    }

    #[test]
    fn degenerate_tops_are_efficient() {
        let q = p("abcd|bacd|cabd|dabc");
        assert!(is_pareto_efficient(&assign("abcd"), &q).unwrap());
        let analysis = analyze_efficiency(&q).unwrap();
        assert_eq!(analysis.efficient_set, vec![assign("abcd")]);
        for i in 0..4 {
            for x in House::all(4) {
                assert_eq!(analysis.is_forced_zero(i, x), x != q.ranking(i).top());
            }
        }
    }

    #[test]
    fn two_cycle_is_inefficient() {
        let q = p("ab|ba");
        assert!(!is_pareto_efficient(&assign("ba"), &q).unwrap());
        assert!(is_pareto_efficient(&assign("ab"), &q).unwrap());
    }

    #[test]
    fn free_house_improvement() {
        let q = p("cab|abc");
        // c is unassigned and agent 0 prefers it
        let a = DeterministicAssignment::new(vec![h('a'), h('b')]).unwrap();
        assert!(!is_pareto_efficient(&a, &q).unwrap());
        let a = DeterministicAssignment::new(vec![h('c'), h('a')]).unwrap();
        assert!(is_pareto_efficient(&a, &q).unwrap());
    }

    #[test]
    fn identical_rankings_make_everything_efficient() {
        let q = p("abcd|abcd|abcd|abcd");
        let all = injective_assignments(4, 4);
        assert_eq!(all.len(), 24);
        assert!(all.iter().all(|a| is_pareto_efficient(a, &q).unwrap()));
        let analysis = analyze_efficiency(&q).unwrap();
        assert!(analysis.forced_zero_cells().is_empty());
    }

    #[test]
    fn forced_zeros_of_walkthrough_profile() {
        let q = p("cbad|abcd|abdc|abdc");
        let z = analyze_efficiency(&q).unwrap();
        for (agent, house) in [(0, 'b'), (0, 'a'), (2, 'c'), (3, 'c')] {
            assert!(z.is_forced_zero(agent, h(house)), "({}, {house})", agent + 1);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DeterministicAssignment::new(vec![h('a'), h('a')]).is_err());
        assert!(is_pareto_efficient(&assign("ab"), &p("abc|abc|abc")).is_err());
        assert!(analyze_efficiency(&p("ab|ab|ab")).is_err());
    }

    #[test]
    fn serial_dictatorships_are_efficient() {
        for q in ["cbad|abcd|abdc|abdc", "abcd|dcba|badc|cdab", "abc|acb|cba"] {
            let q = p(q);
            let analysis = analyze_efficiency(&q).unwrap();
            for order in permutations(q.n()) {
                let a = serial_dictatorship(&q, &order).unwrap();
                assert!(analysis.efficient_set.contains(&a));
            }
        }
    }

    #[test]
    fn expost_examples() {
        let q = p("abcd|abcd|abcd|abcd");
        let quarter = AssignmentMatrix::from_fn(4, 4, |_, _| rational(1, 4));
        assert!(is_expost_efficient(&quarter, &q).unwrap());
        let d = p("abcd|bacd|cabd|dabc");
        assert!(!is_expost_efficient(&quarter, &d).unwrap());
        let tops = AssignmentMatrix::from_assignment(&assign("abcd"), 4);
        assert!(is_expost_efficient(&tops, &d).unwrap());
        let wrong = AssignmentMatrix::from_assignment(&assign("abdc"), 4);
        assert!(!is_expost_efficient(&wrong, &d).unwrap());
    }
}
