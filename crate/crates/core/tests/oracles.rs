//! Library functions against brute-force reimplementations on random
//! four-agent profiles and on the full three-agent domain.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

use rsdcert::efficiency::{injective_assignments, is_pareto_efficient};
use rsdcert::exact::rational;
use rsdcert::mechanisms::{check_eta, check_expe, check_sp, rsd, RandomSerialDictatorship};
use rsdcert::prefs::{all_swaps, apply_swap, canonicalize, enumerate_profiles, swap_delta, Renaming};
use rsdcert::{House, Profile};

fn random_profile(rng: &mut StdRng, n: usize, m: usize) -> Profile {
    let rows: Vec<String> = (0..n)
        .map(|_| {
            let mut letters: Vec<char> = (0..m).map(|h| (b'a' + h as u8) as char).collect();
            letters.shuffle(rng);
            letters.into_iter().collect()
        })
        .collect();
    rows.join("|").parse().unwrap()
}

fn perms(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in perms(k - 1) {
        for at in 0..k {
            let mut q = p.clone();
            q.insert(at, k - 1);
            out.push(q);
        }
    }
    out
}

fn order(p: &Profile, i: usize) -> Vec<usize> {
    p.ranking(i).houses().iter().map(|h| h.index()).collect()
}

fn rank(p: &Profile, i: usize, h: usize) -> usize {
    order(p, i).iter().position(|&x| x == h).unwrap()
}

fn disagreements(p: &Profile) -> i64 {
    let mut d = 0;
    for i in 0..p.n() {
        for j in i + 1..p.n() {
            for x in 0..p.m() {
                for y in x + 1..p.m() {
                    if (rank(p, i, x) < rank(p, i, y)) != (rank(p, j, x) < rank(p, j, y)) {
                        d += 1;
                    }
                }
            }
        }
    }
    d
}

#[test]
fn rsd_matches_ordering_average() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..300 {
        let p = random_profile(&mut rng, 4, 4);
        let mut counts = [[0i64; 4]; 4];
        let orders = perms(4);
        for ord in &orders {
            let mut taken = [false; 4];
            for &i in ord {
                let h = order(&p, i).into_iter().find(|&h| !taken[h]).unwrap();
                taken[h] = true;
                counts[i][h] += 1;
            }
        }
        let got = rsd(&p).unwrap();
        for i in 0..4 {
            for h in 0..4 {
                assert_eq!(*got.get(i, House::new(h).unwrap()), rational(counts[i][h], 24), "{p}");
            }
        }
    }
}

#[test]
fn delta_law() {
    let mut rng = StdRng::seed_from_u64(2);
    let (mut unanimous, mut split) = (0, 0);
    for _ in 0..10_000 {
        let p = random_profile(&mut rng, 4, 4);
        let d = disagreements(&p);
        assert_eq!(p.disagreement_parameter() as i64, d);
        for s in all_swaps(4, 4) {
            let (x, y) = s.houses(&p);
            let agree = (0..4)
                .filter(|&j| j != s.agent && rank(&p, j, x.index()) < rank(&p, j, y.index()))
                .count() as i64;
            let expect = agree - (3 - agree);
            let q = apply_swap(&p, s).unwrap();
            assert_eq!(disagreements(&q) - d, expect, "{p} {s:?}");
            assert_eq!(swap_delta(&p, s), expect);
            match agree {
                0 | 3 => {
                    assert_eq!(expect.abs(), 3);
                    unanimous += 1;
                }
                _ => {
                    assert_eq!(expect.abs(), 1);
                    split += 1;
                }
            }
        }
    }
    assert_eq!(unanimous + split, 120_000);
}

#[test]
fn envy_cycles_agree_with_dominance() {
    let assignments = injective_assignments(3, 3);
    assert_eq!(assignments.len(), 6);
    for p in enumerate_profiles(3, 3).unwrap() {
        for a in &assignments {
            let dominated = assignments.iter().any(|b| {
                b != a && (0..3).all(|i| rank(&p, i, b.house_of(i).index()) <= rank(&p, i, a.house_of(i).index()))
            });
            assert_eq!(is_pareto_efficient(a, &p).unwrap(), !dominated, "{p} {a:?}");
        }
    }
}

#[test]
fn canonical_form_is_least_renaming() {
    let mut rng = StdRng::seed_from_u64(3);
    let renamings: Vec<Renaming> = perms(4)
        .into_iter()
        .flat_map(|agents| {
            perms(4).into_iter().map(move |hs| Renaming {
                agents: agents.clone(),
                houses: hs.into_iter().map(|h| House::new(h).unwrap()).collect(),
            })
        })
        .collect();
    assert_eq!(renamings.len(), 576);
    for _ in 0..200 {
        let p = random_profile(&mut rng, 4, 4);
        let least = renamings.iter().map(|r| r.apply(&p)).min().unwrap();
        let form = canonicalize(&p);
        assert_eq!(form.representative, least, "{p}");
        assert_eq!(form.renaming().apply(&p), least);
    }
}

#[test]
fn rsd_satisfies_axioms_on_random_profiles() {
    let mut rng = StdRng::seed_from_u64(4);
    for _ in 0..1_000 {
        let p = random_profile(&mut rng, 4, 4);
        assert!(check_expe(&RandomSerialDictatorship, &p).unwrap(), "{p}");
        assert!(check_eta(&RandomSerialDictatorship, &p), "{p}");
        for s in all_swaps(4, 4) {
            assert!(check_sp(&RandomSerialDictatorship, &p, s).unwrap(), "{p} {s:?}");
        }
    }
}
