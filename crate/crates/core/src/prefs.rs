//! Strict preferences over houses.
//!
//! A [`Profile`] lists one [`Ranking`] per agent. Agents are 0-indexed here;
//! human-facing output (reports, the CLI) numbers them from 1.
//!
//! Profiles have a compact text form: each ranking is a string of house
//! letters, most preferred first, and rankings are joined by `|`:
//! `"abcd|abdc|acbd|bacd"`. Whitespace around the separators is ignored.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest number of houses the crate handles (letters `a`..`f`).
pub const MAX_HOUSES: usize = 6;

/// Upper bound on the number of profiles [`enumerate_profiles`] will stream.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct House(u8);

impl House {
    pub fn new(index: usize) -> Result<Self> {
        if index >= MAX_HOUSES {
            return Err(Error::HouseOutOfRange {
                house: index,
                m: MAX_HOUSES,
            });
        }
        Ok(House(index as u8))
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'a'..='f' => Some(House(c as u8 - b'a')),
            _ => None,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn letter(self) -> char {
        (b'a' + self.0) as char
    }

    /// All houses `a`, `b`, ... of an `m`-house problem.
    pub fn all(m: usize) -> impl Iterator<Item = House> {
        (0..m as u8).map(House)
    }
}

impl fmt::Display for House {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A strict ranking of all `m` houses, most preferred first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Ranking {
    order: Vec<House>,
}

impl Ranking {
    pub fn new(order: Vec<House>) -> Result<Self> {
        let m = order.len();
        if m == 0 {
            return Err(Error::NoHouses);
        }
        if m > MAX_HOUSES {
            return Err(Error::TooManyHouses(m));
        }
        let mut seen = [false; MAX_HOUSES];
        for &h in &order {
            if h.index() >= m {
                return Err(Error::HouseOutOfRange { house: h.index(), m });
            }
            if seen[h.index()] {
                return Err(Error::DuplicateHouse {
                    agent: 0,
                    house: h.letter(),
                });
            }
            seen[h.index()] = true;
        }
        Ok(Ranking { order })
    }

    /// The ranking `a ≻ b ≻ c ≻ ...` over `m` houses.
    pub fn identity(m: usize) -> Self {
        Ranking {
            order: House::all(m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn houses(&self) -> &[House] {
        &self.order
    }

    pub fn top(&self) -> House {
        self.order[0]
    }

    pub fn house_at(&self, position: usize) -> House {
        self.order[position]
    }

    /// Rank of `h`, 0 for the favourite.
    pub fn position(&self, h: House) -> usize {
        self.order
            .iter()
            .position(|&x| x == h)
            .expect("house belongs to the ranking")
    }

    /// Houses ranked strictly above `h`, in order.
    pub fn prefix_above(&self, h: House) -> &[House] {
        &self.order[..self.position(h)]
    }

    pub fn prefers(&self, x: House, y: House) -> Result<bool> {
        if x == y {
            return Err(Error::SameHouse(x.letter()));
        }
        Ok(self.position(x) < self.position(y))
    }

    /// Adjacent pairs `(x, y)` with `x` immediately above `y`.
    pub fn adjacent_pairs(&self) -> impl Iterator<Item = (House, House)> + '_ {
        self.order.windows(2).map(|w| (w[0], w[1]))
    }

    pub(crate) fn swapped(&self, position: usize) -> Ranking {
        let mut order = self.order.clone();
        order.swap(position, position + 1);
        Ranking { order }
    }

    pub(crate) fn renamed(&self, houses: &[House]) -> Ranking {
        Ranking {
            order: self.order.iter().map(|h| houses[h.index()]).collect(),
        }
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for h in &self.order {
            write!(f, "{}", h.letter())?;
        }
        Ok(())
    }
}

/// One ranking per agent, all over the same house set.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Profile {
    rankings: Vec<Ranking>,
}

impl Profile {
    pub fn new(rankings: Vec<Ranking>) -> Result<Self> {
        let first = rankings.first().ok_or(Error::EmptyProfile)?;
        let m = first.len();
        for (agent, r) in rankings.iter().enumerate() {
            if r.len() != m {
                return Err(Error::InconsistentLength {
                    agent,
                    expected: m,
                    found: r.len(),
                });
            }
        }
        Ok(Profile { rankings })
    }

    /// `n` copies of `a ≻ b ≻ ...`.
    pub fn unanimous(n: usize, m: usize) -> Self {
        Profile {
            rankings: vec![Ranking::identity(m); n],
        }
    }

    pub fn n(&self) -> usize {
        self.rankings.len()
    }

    pub fn m(&self) -> usize {
        self.rankings[0].len()
    }

    pub fn ranking(&self, agent: usize) -> &Ranking {
        &self.rankings[agent]
    }

    pub fn rankings(&self) -> &[Ranking] {
        &self.rankings
    }

    pub fn apply_swap(&self, swap: AdjacentSwap) -> Result<Profile> {
        apply_swap(self, swap)
    }

    pub fn disagreement_parameter(&self) -> u32 {
        disagreement_parameter(self)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rankings.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_profile(s)
    }
}

impl Serialize for Profile {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Profile {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_profile(&s).map_err(serde::de::Error::custom)
    }
}

/// Parses the `|`-separated text form, e.g. `"abcd|abdc|acbd|bacd"`.
pub fn parse_profile(text: &str) -> Result<Profile> {
    let mut rankings = Vec::new();
    let mut m = None;
    for (agent, part) in text.split('|').enumerate() {
        let part = part.trim();
        let expected = *m.get_or_insert(part.chars().count());
        if expected > MAX_HOUSES {
            return Err(Error::TooManyHouses(expected));
        }
        if expected == 0 {
            return Err(Error::NoHouses);
        }
        let mut order = Vec::with_capacity(expected);
        let mut seen = [false; MAX_HOUSES];
        for c in part.chars() {
            let last = (b'a' + expected as u8 - 1) as char;
            let h = House::from_letter(c)
                .filter(|h| h.index() < expected)
                .ok_or(Error::MalformedLetter { agent, letter: c, last })?;
            if seen[h.index()] {
                return Err(Error::DuplicateHouse { agent, house: c });
            }
            seen[h.index()] = true;
            order.push(h);
        }
        if order.len() != expected {
            return Err(Error::InconsistentLength {
                agent,
                expected,
                found: order.len(),
            });
        }
        rankings.push(Ranking { order });
    }
    Profile::new(rankings)
}

/// Transposes the houses at positions `position` and `position + 1` of one
/// agent's ranking.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct AdjacentSwap {
    pub agent: usize,
    pub position: usize,
}

impl AdjacentSwap {
    pub fn new(agent: usize, position: usize) -> Self {
        AdjacentSwap { agent, position }
    }

    /// The two houses exchanged when the swap is applied to `p`.
    pub fn houses(&self, p: &Profile) -> (House, House) {
        let r = p.ranking(self.agent);
        (r.house_at(self.position), r.house_at(self.position + 1))
    }
}

pub fn apply_swap(p: &Profile, s: AdjacentSwap) -> Result<Profile> {
    if s.agent >= p.n() {
        return Err(Error::AgentOutOfRange {
            agent: s.agent,
            n: p.n(),
        });
    }
    if s.position + 1 >= p.m() {
        return Err(Error::SwapOutOfRange {
            position: s.position,
            m: p.m(),
        });
    }
    let mut rankings = p.rankings.clone();
    rankings[s.agent] = rankings[s.agent].swapped(s.position);
    Ok(Profile { rankings })
}

/// Every adjacent swap of every agent, agent-major.
pub fn all_swaps(n: usize, m: usize) -> impl Iterator<Item = AdjacentSwap> {
    (0..n).flat_map(move |agent| (0..m.saturating_sub(1)).map(move |position| AdjacentSwap { agent, position }))
}

pub fn prefers(r: &Ranking, x: House, y: House) -> Result<bool> {
    r.prefers(x, y)
}

/// Number of (agent pair, house pair) combinations on which the two agents
/// order the houses oppositely.
pub fn disagreement_parameter(p: &Profile) -> u32 {
    let n = p.n();
    let m = p.m();
    let positions: Vec<[usize; MAX_HOUSES]> = p
        .rankings
        .iter()
        .map(|r| {
            let mut pos = [0; MAX_HOUSES];
            for (k, h) in r.order.iter().enumerate() {
                pos[h.index()] = k;
            }
            pos
        })
        .collect();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            for x in 0..m {
                for y in x + 1..m {
                    let i_xy = positions[i][x] < positions[i][y];
                    let j_xy = positions[j][x] < positions[j][y];
                    if i_xy != j_xy {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Change in the disagreement parameter caused by `s`: the number of other
/// agents agreeing with the pre-swap order of the pair minus the number
/// disagreeing.
pub fn swap_delta(p: &Profile, s: AdjacentSwap) -> i64 {
    let (x, y) = s.houses(p);
    let mut delta = 0i64;
    for (j, r) in p.rankings.iter().enumerate() {
        if j == s.agent {
            continue;
        }
        if r.position(x) < r.position(y) {
            delta += 1;
        } else {
            delta -= 1;
        }
    }
    delta
}

fn factorial(k: usize) -> u128 {
    (1..=k as u128).product()
}

/// All `m!` rankings in lexicographic order of their letter strings.
pub fn enumerate_rankings(m: usize) -> Result<Vec<Ranking>> {
    if m == 0 {
        return Err(Error::NoHouses);
    }
    if m > MAX_HOUSES {
        return Err(Error::TooManyHouses(m));
    }
    let mut out = Vec::with_capacity(factorial(m) as usize);
    let mut current: Vec<House> = House::all(m).collect();
    loop {
        out.push(Ranking { order: current.clone() });
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(out)
}

/// Advances to the lexicographically next permutation; false at the last one.
pub(crate) fn next_permutation<T: Ord>(xs: &mut [T]) -> bool {
    if xs.len() < 2 {
        return false;
    }
    let mut i = xs.len() - 1;
    while i > 0 && xs[i - 1] >= xs[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = xs.len() - 1;
    while xs[j] <= xs[i - 1] {
        j -= 1;
    }
    xs.swap(i - 1, j);
    xs[i..].reverse();
    true
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..k).collect();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

pub fn profile_count(n: usize, m: usize) -> u128 {
    factorial(m).saturating_pow(n as u32)
}

/// Streams every `n`-agent profile over `m` houses, ordered
/// lexicographically by the agents' ranking indices.
pub fn enumerate_profiles(n: usize, m: usize) -> Result<ProfileStream> {
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    let rankings = enumerate_rankings(m)?;
    let count = profile_count(n, m);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(ProfileStream {
        rankings,
        digits: vec![0; n],
        done: false,
        remaining: count as usize,
    })
}

pub struct ProfileStream {
    rankings: Vec<Ranking>,
    digits: Vec<usize>,
    done: bool,
    remaining: usize,
}

impl Iterator for ProfileStream {
    type Item = Profile;

    fn next(&mut self) -> Option<Profile> {
        if self.done {
            return None;
        }
        let profile = Profile {
            rankings: self.digits.iter().map(|&d| self.rankings[d].clone()).collect(),
        };
        // odometer increment, last agent fastest
        let base = self.rankings.len();
        let mut k = self.digits.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < base {
                break;
            }
            self.digits[k] = 0;
        }
        self.remaining -= 1;
        Some(profile)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for ProfileStream {}

/// Relabelling of agents and houses. Agent `i` becomes agent `agents[i]` and
/// house `h` becomes house `houses[h]`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Renaming {
    pub agents: Vec<usize>,
    pub houses: Vec<House>,
}

impl Renaming {
    pub fn identity(n: usize, m: usize) -> Self {
        Renaming {
            agents: (0..n).collect(),
            houses: House::all(m).collect(),
        }
    }

    pub fn apply(&self, p: &Profile) -> Profile {
        let mut rankings = vec![Ranking { order: Vec::new() }; p.n()];
        for (i, r) in p.rankings.iter().enumerate() {
            rankings[self.agents[i]] = r.renamed(&self.houses);
        }
        Profile { rankings }
    }

    pub fn inverse(&self) -> Renaming {
        let mut agents = vec![0; self.agents.len()];
        for (i, &j) in self.agents.iter().enumerate() {
            agents[j] = i;
        }
        let mut houses = vec![House(0); self.houses.len()];
        for (h, &g) in self.houses.iter().enumerate() {
            houses[g.index()] = House(h as u8);
        }
        Renaming { agents, houses }
    }

    pub fn house(&self, h: House) -> House {
        self.houses[h.index()]
    }
}

impl Serialize for House {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_char(self.letter())
    }
}

impl<'de> Deserialize<'de> for House {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let c = char::deserialize(deserializer)?;
        House::from_letter(c).ok_or_else(|| serde::de::Error::custom(format!("bad house letter '{c}'")))
    }
}

/// Least profile of an orbit together with a renaming mapping the input onto it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CanonicalForm {
    pub representative: Profile,
    pub agent_renaming: Vec<usize>,
    pub house_renaming: Vec<House>,
}

impl CanonicalForm {
    pub fn renaming(&self) -> Renaming {
        Renaming {
            agents: self.agent_renaming.clone(),
            houses: self.house_renaming.clone(),
        }
    }
}

/// Lexicographically least profile reachable by renaming agents and houses.
///
/// The least profile always starts with the identity ranking, so only the
/// `n` house renamings sending some agent's ranking to `abc..` can win; for
/// each of them the best agent order is the sorted one.
pub fn canonicalize(p: &Profile) -> CanonicalForm {
    let n = p.n();
    let m = p.m();
    let mut best: Option<CanonicalForm> = None;
    for lead in 0..n {
        let mut houses = vec![House(0); m];
        for (k, h) in p.rankings[lead].order.iter().enumerate() {
            houses[h.index()] = House(k as u8);
        }
        let renamed: Vec<Ranking> = p.rankings.iter().map(|r| r.renamed(&houses)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| renamed[a].cmp(&renamed[b]));
        let mut agents = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            agents[old] = new;
        }
        let representative = Profile {
            rankings: order.iter().map(|&i| renamed[i].clone()).collect(),
        };
        if best.as_ref().is_none_or(|b| representative < b.representative) {
            best = Some(CanonicalForm {
                representative,
                agent_renaming: agents,
                house_renaming: houses,
            });
        }
    }
    best.expect("profile has at least one agent")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Profile {
        s.parse().unwrap()
    }

    #[test]
    fn parse_examples() {
        let u = p("abcd|abcd|abcd|abcd");
        assert_eq!(u.n(), 4);
        assert!(u.rankings().iter().all(|r| r.to_string() == "abcd"));
        let d = p("abcd|abdc|acbd|bacd");
        assert_eq!(d.ranking(3).to_string(), "bacd");
        assert_eq!(
            parse_profile("abca|abcd"),
            Err(Error::DuplicateHouse { agent: 0, house: 'a' })
        );
    }

    #[test]
    fn parse_errors_name_the_agent() {
        assert!(matches!(
            parse_profile("abcd|abce"),
            Err(Error::MalformedLetter {
                agent: 1,
                letter: 'e',
                ..
            })
        ));
        assert!(matches!(
            parse_profile("abcd|abc"),
            Err(Error::InconsistentLength {
                agent: 1,
                expected: 4,
                found: 3
            })
        ));
        assert!(matches!(
            parse_profile("ab|"),
            Err(Error::InconsistentLength { agent: 1, .. })
        ));
        assert!(matches!(parse_profile("abcdefg"), Err(Error::TooManyHouses(7))));
        assert!(matches!(
            parse_profile("ab1"),
            Err(Error::MalformedLetter { letter: '1', .. })
        ));
    }

    #[test]
    fn whitespace_around_separators_is_ignored() {
        assert_eq!(p(" abc | bca|cab "), p("abc|bca|cab"));
    }

    #[test]
    fn ranking_enumeration() {
        let one = enumerate_rankings(1).unwrap();
        assert_eq!(one.iter().map(|r| r.to_string()).collect::<Vec<_>>(), ["a"]);
        let three = enumerate_rankings(3).unwrap();
        assert_eq!(three.len(), 6);
        assert_eq!(three[0].to_string(), "abc");
        assert_eq!(three[5].to_string(), "cba");
        assert!(three.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(enumerate_rankings(4).unwrap().len(), 24);
        assert!(enumerate_rankings(7).is_err());
    }

    #[test]
    fn profile_enumeration_counts() {
        assert_eq!(enumerate_profiles(2, 2).unwrap().count(), 4);
        assert_eq!(enumerate_profiles(3, 4).unwrap().len(), 13_824);
        assert_eq!(enumerate_profiles(4, 4).unwrap().len(), 331_776);
        match enumerate_profiles(6, 5) {
            Err(Error::EnumerationTooLarge { count, .. }) => assert_eq!(count, 120u128.pow(6)),
            other => panic!("expected refusal, got {:?}", other.map(|s| s.len())),
        }
    }

    #[test]
    fn profile_enumeration_is_lexicographic() {
        let all: Vec<Profile> = enumerate_profiles(2, 3).unwrap().collect();
        assert_eq!(all.len(), 36);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all[0].to_string(), "abc|abc");
        assert_eq!(all[1].to_string(), "abc|acb");
    }

    #[test]
    fn swaps() {
        assert_eq!(
            apply_swap(&p("abcd|abcd"), AdjacentSwap::new(0, 2)).unwrap(),
            p("abdc|abcd")
        );
        assert_eq!(
            apply_swap(&p("abcd|abdc|acbd|bacd"), AdjacentSwap::new(3, 0)).unwrap(),
            p("abcd|abdc|acbd|abcd")
        );
        let q = p("abcd|dcba");
        let s = AdjacentSwap::new(1, 1);
        assert_eq!(apply_swap(&apply_swap(&q, s).unwrap(), s).unwrap(), q);
        assert!(matches!(
            apply_swap(&q, AdjacentSwap::new(0, 3)),
            Err(Error::SwapOutOfRange { .. })
        ));
        assert!(matches!(
            apply_swap(&q, AdjacentSwap::new(2, 0)),
            Err(Error::AgentOutOfRange { .. })
        ));
    }

    #[test]
    fn disagreement_examples() {
        assert_eq!(disagreement_parameter(&p("abcd|abcd|abcd|abcd")), 0);
        assert_eq!(disagreement_parameter(&p("abcd|abcd|abcd|abdc")), 3);
        // 2-1 split on {c,d}: the minority agent flipping to the majority
        let q = p("abcd|abdc|abdc");
        let s = AdjacentSwap::new(0, 2);
        assert_eq!(swap_delta(&q, s), -2);
        let q2 = p("abcd|abcd|abdc|abdc");
        // 2-2 becomes 1-3
        assert_eq!(swap_delta(&q2, AdjacentSwap::new(0, 2)), -1);
        let after = apply_swap(&q2, AdjacentSwap::new(0, 2)).unwrap();
        assert_eq!(
            disagreement_parameter(&after) as i64 - disagreement_parameter(&q2) as i64,
            -1
        );
    }

    #[test]
    fn prefers_examples() {
        let r = &p("abcd").rankings()[0].clone();
        let h = |c| House::from_letter(c).unwrap();
        assert!(prefers(r, h('a'), h('d')).unwrap());
        assert!(!prefers(r, h('d'), h('a')).unwrap());
        let r2 = p("dcba").ranking(0).clone();
        assert!(prefers(&r2, h('c'), h('b')).unwrap());
        assert_eq!(prefers(&r2, h('c'), h('c')), Err(Error::SameHouse('c')));
    }

    #[test]
    fn canonical_examples() {
        let c = canonicalize(&p("bacd|bacd|bacd|bacd"));
        assert_eq!(c.representative, p("abcd|abcd|abcd|abcd"));
        assert_eq!(c.house_renaming[0].letter(), 'b');
        assert_eq!(c.house_renaming[1].letter(), 'a');
        let u = p("abcd|abcd|abcd|abcd");
        assert_eq!(canonicalize(&u).representative, u);
    }

    #[test]
    fn canonical_renaming_witnesses_representative() {
        for q in [
            "dcba|abdc|cabd",
            "bca|acb|bca",
            "abcd|abdc|acbd|bacd",
            "cbad|abcd|abdc|abdc",
        ] {
            let q = p(q);
            let c = canonicalize(&q);
            assert_eq!(c.renaming().apply(&q), c.representative);
            assert_eq!(c.renaming().inverse().apply(&c.representative), q);
        }
    }

    #[test]
    fn orbits_partition_three_by_three() {
        // brute force: orbit of every profile under all 36 renamings
        use std::collections::{BTreeMap, BTreeSet};
        let mut orbits: BTreeMap<Profile, BTreeSet<Profile>> = BTreeMap::new();
        let agent_perms = permutations(3);
        let house_perms = permutations(3);
        for q in enumerate_profiles(3, 3).unwrap() {
            let mut orbit = BTreeSet::new();
            for a in &agent_perms {
                for h in &house_perms {
                    let r = Renaming {
                        agents: a.clone(),
                        houses: h.iter().map(|&x| House::new(x).unwrap()).collect(),
                    };
                    orbit.insert(r.apply(&q));
                }
            }
            let least = orbit.iter().next().unwrap().clone();
            assert_eq!(canonicalize(&q).representative, least);
            orbits.insert(least, orbit);
        }
        let total: usize = orbits.values().map(|o| o.len()).sum();
        assert_eq!(total, 216);
    }
}
