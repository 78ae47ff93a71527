//! The canonical profiles of one `(n, m)` domain.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prefs::{canonicalize, enumerate_rankings, permutations, profile_count, House, Profile, Ranking, Renaming};

/// Largest number of agents or houses the verifier accepts.
pub const MAX_VERIFY_SIZE: usize = 4;

#[derive(Clone, Debug)]
pub struct Universe {
    n: usize,
    m: usize,
    /// Canonical representatives sorted by `(D, profile)`.
    profiles: Vec<Profile>,
    levels: Vec<u32>,
    orbit_sizes: Vec<u64>,
    index: HashMap<Profile, usize>,
}

pub(crate) fn check_size(n: usize, m: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyProfile);
    }
    if m == 0 {
        return Err(Error::NoHouses);
    }
    for (what, got) in [("verification agents", n), ("verification houses", m)] {
        if got > MAX_VERIFY_SIZE {
            return Err(Error::SizeGuard {
                what,
                limit: MAX_VERIFY_SIZE,
                got,
            });
        }
    }
    if n > m {
        return Err(Error::MoreAgentsThanHouses { n, m });
    }
    Ok(())
}

/// Profiles starting with the identity ranking whose remaining rankings are
/// non-decreasing. Every orbit minimum has this shape.
fn candidates(n: usize, rankings: &[Ranking]) -> Vec<Profile> {
    fn extend(prefix: &mut Vec<Ranking>, from: usize, n: usize, rankings: &[Ranking], out: &mut Vec<Profile>) {
        if prefix.len() == n {
            out.push(Profile::new(prefix.clone()).expect("valid rankings"));
            return;
        }
        for k in from..rankings.len() {
            prefix.push(rankings[k].clone());
            extend(prefix, k, n, rankings, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(&mut vec![rankings[0].clone()], 0, n, rankings, &mut out);
    out
}

impl Universe {
    pub fn build(n: usize, m: usize) -> Result<Universe> {
        check_size(n, m)?;
        let rankings = enumerate_rankings(m)?;
        let mut profiles: Vec<Profile> = candidates(n, &rankings)
            .into_par_iter()
            .filter(|p| canonicalize(p).representative == *p)
            .collect();
        profiles.sort_by_cached_key(|p| (p.disagreement_parameter(), p.clone()));
        let renamings: Vec<Renaming> = permutations(n)
            .into_iter()
            .flat_map(|agents| {
                permutations(m).into_iter().map(move |hs| Renaming {
                    agents: agents.clone(),
                    houses: hs.into_iter().map(|h| House::new(h).expect("in range")).collect(),
                })
            })
            .collect();
        let orbit_sizes: Vec<u64> = profiles
            .par_iter()
            .map(|p| {
                let stabiliser = renamings.iter().filter(|r| r.apply(p) == *p).count();
                (renamings.len() / stabiliser) as u64
            })
            .collect();
        debug_assert_eq!(
            orbit_sizes.iter().map(|&s| s as u128).sum::<u128>(),
            profile_count(n, m)
        );
        let levels = profiles.iter().map(Profile::disagreement_parameter).collect();
        let index = profiles.iter().enumerate().map(|(k, p)| (p.clone(), k)).collect();
        Ok(Universe {
            n,
            m,
            profiles,
            levels,
            orbit_sizes,
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn profile(&self, k: usize) -> &Profile {
        &self.profiles[k]
    }

    pub fn level(&self, k: usize) -> u32 {
        self.levels[k]
    }

    pub fn orbit_size(&self, k: usize) -> u64 {
        self.orbit_sizes[k]
    }

    /// Position of a canonical representative.
    pub fn index_of(&self, p: &Profile) -> Option<usize> {
        self.index.get(p).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefs::enumerate_profiles;
    use std::collections::BTreeSet;

    #[test]
    fn orbit_sizes_cover_the_domain() {
        for (n, m) in [(1, 1), (2, 2), (2, 3), (3, 3), (3, 4)] {
            let u = Universe::build(n, m).unwrap();
            let total: u64 = (0..u.len()).map(|k| u.orbit_size(k)).sum();
            assert_eq!(total as u128, profile_count(n, m), "({n},{m})");
        }
    }

    #[test]
    fn representatives_match_brute_force() {
        let u = Universe::build(3, 3).unwrap();
        let reps: BTreeSet<Profile> = enumerate_profiles(3, 3)
            .unwrap()
            .map(|p| canonicalize(&p).representative)
            .collect();
        assert_eq!(reps.len(), 10);
        assert_eq!(u.profiles().iter().cloned().collect::<BTreeSet<_>>(), reps);
    }

    #[test]
    fn sorted_by_level() {
        let u = Universe::build(3, 4).unwrap();
        for k in 1..u.len() {
            assert!((u.level(k - 1), u.profile(k - 1)) < (u.level(k), u.profile(k)));
        }
        assert_eq!(u.level(0), 0);
    }

    #[test]
    fn size_guards() {
        assert!(matches!(Universe::build(5, 5), Err(Error::SizeGuard { .. })));
        assert!(matches!(Universe::build(4, 3), Err(Error::MoreAgentsThanHouses { .. })));
        assert!(Universe::build(0, 2).is_err());
    }
}
