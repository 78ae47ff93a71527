use std::collections::HashMap;
use std::sync::OnceLock;

use num_traits::One;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use rsdcert::axioms::is_near_unanimous;
use rsdcert::exact::{rational, Rational, SolveOutcome};
use rsdcert::mechanisms::rsd;
use rsdcert::prefs::{all_swaps, apply_swap, canonicalize, enumerate_rankings};
use rsdcert::verifier::{
    build_constraints, replay_certificate, verify_theorem, ImportCells, Known, KnownMatrix, Outcome, Reason, Verdict,
    VerificationReport,
};
use rsdcert::{Cell, House, Profile};

fn report() -> &'static VerificationReport {
    static REPORT: OnceLock<VerificationReport> = OnceLock::new();
    REPORT.get_or_init(|| verify_theorem(4, 4).unwrap())
}

fn p(s: &str) -> Profile {
    s.parse().unwrap()
}

fn h(c: char) -> House {
    House::from_letter(c).unwrap()
}

fn random_profile(rng: &mut StdRng, n: usize, m: usize) -> Profile {
    let rankings = enumerate_rankings(m).unwrap();
    Profile::new(
        (0..n)
            .map(|_| rankings[rng.gen_range(0..rankings.len())].clone())
            .collect(),
    )
    .unwrap()
}

/// Complete RSD matrices for every profile in `profiles`, stamped round 0.
fn rsd_db(profiles: impl IntoIterator<Item = Profile>) -> HashMap<Profile, KnownMatrix> {
    profiles
        .into_iter()
        .map(|q| {
            let m = rsd(&q).unwrap();
            let known = m
                .entries()
                .iter()
                .map(|v| {
                    Some(Known {
                        value: v.clone(),
                        round: 0,
                    })
                })
                .collect();
            (q, known)
        })
        .collect()
}

#[test]
fn four_by_four_is_determined_and_equals_rsd() {
    let r = report();
    assert_eq!(r.records().len(), 762);
    let total: u64 = r.records().iter().map(|x| x.orbit_size).sum();
    assert_eq!(total, 331_776);
    assert_eq!(r.verdict(), Verdict::AllEqualRsd);
    for rec in r.records() {
        assert_eq!(rec.outcome, Outcome::UniqueEqualsRSD, "{}", rec.profile);
        assert_eq!(rec.matrix.as_ref().unwrap(), &rsd(&rec.profile).unwrap());
    }
}

#[test]
fn one_by_one() {
    let r = verify_theorem(1, 1).unwrap();
    assert_eq!(r.records().len(), 1);
    let rec = &r.records()[0];
    assert_eq!(rec.outcome, Outcome::UniqueEqualsRSD);
    assert_eq!(rec.matrix.as_ref().unwrap().entries(), &[Rational::one()]);
    assert_eq!(r.verdict(), Verdict::AllEqualRsd);
}

#[test]
fn size_guard_refuses_five() {
    assert!(verify_theorem(5, 5).is_err());
    assert!(verify_theorem(4, 3).is_err());
}

#[test]
fn every_certificate_replays() {
    let r = report();
    for rec in r.records() {
        let cert = rec.certificate.as_ref().unwrap();
        replay_certificate(cert, r.database()).unwrap_or_else(|e| panic!("{}: {e}", rec.profile));
        for step in &cert.steps {
            let Reason::SpImport { import, .. } = &step.reason else {
                continue;
            };
            assert!(import.round < step.round);
        }
    }
}

#[test]
fn perturbed_certificate_is_rejected() {
    let r = report();
    let rec = r
        .records()
        .iter()
        .find(|x| x.profile == p("abcd|abcd|abdc|abdc"))
        .unwrap();
    let cert = rec.certificate.clone().unwrap();
    let eps = rational(1, 1_000_000);

    let mut bad = cert.clone();
    bad.steps[3].value += &eps;
    assert!(replay_certificate(&bad, r.database()).is_err());

    let mut bad = cert.clone();
    let c = Cell::new(0, h('a'));
    let v = bad.final_matrix.at(c) + &eps;
    bad.final_matrix.set(0, h('a'), v);
    assert!(replay_certificate(&bad, r.database()).is_err());
}

#[test]
fn wrong_level_or_dangling_source_is_rejected() {
    let r = report();
    let rec = r
        .records()
        .iter()
        .find(|x| {
            x.certificate
                .as_ref()
                .unwrap()
                .steps
                .iter()
                .any(|s| matches!(s.reason, Reason::SpImport { .. }))
        })
        .unwrap();
    let cert = rec.certificate.clone().unwrap();
    let k = cert
        .steps
        .iter()
        .position(|s| matches!(s.reason, Reason::SpImport { .. }))
        .unwrap();

    let mut bad = cert.clone();
    if let Reason::SpImport { import, .. } = &mut bad.steps[k].reason {
        import.level += 1;
    }
    let err = replay_certificate(&bad, r.database()).unwrap_err();
    assert!(err.to_string().contains("level"), "{err}");

    let empty: HashMap<Profile, KnownMatrix> = HashMap::new();
    let err = replay_certificate(&cert, &empty).unwrap_err();
    assert!(err.to_string().contains("dangling"), "{err}");
}

#[test]
fn walkthrough_profile_certificate() {
    let r = report();
    let q = p("cbad|abcd|abdc|abdc");
    let cert = r.certificate_for(&q).unwrap();
    assert_eq!(cert.profile, q);
    for (agent, house) in [(0, 'b'), (0, 'a'), (2, 'c'), (3, 'c')] {
        assert_eq!(cert.tag_of(Cell::new(agent, h(house))), Some("Efficiency"));
    }
    replay_certificate(&cert, r.database()).unwrap();
    assert_eq!(cert.final_matrix, rsd(&q).unwrap());
}

#[test]
fn degenerate_and_unanimous_certificates() {
    let r = report();
    let d = p("abcd|bacd|cabd|dabc");
    let cert = r.certificate_for(&d).unwrap();
    for step in &cert.steps {
        let top = d.ranking(step.cell.agent).top() == step.cell.house;
        assert_eq!(step.reason.tag(), if top { "AgentComplement" } else { "Efficiency" });
    }
    let u = p("abcd|abcd|abcd|abcd");
    let cert = r.certificate_for(&u).unwrap();
    assert!(cert
        .steps
        .iter()
        .all(|s| matches!(s.reason.tag(), "Eta" | "HouseComplement" | "AgentComplement")));
    assert!(cert.final_matrix.entries().iter().all(|v| *v == rational(1, 4)));
}

#[test]
fn orbit_consistency_on_random_profiles() {
    let r = report();
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..300 {
        let q = random_profile(&mut rng, 4, 4);
        let cert = r.certificate_for(&q).unwrap();
        assert_eq!(cert.profile, q);
        assert_eq!(cert.final_matrix, rsd(&q).unwrap(), "{q}");
        replay_certificate(&cert, r.database()).unwrap_or_else(|e| panic!("{q}: {e}"));
        let rec = r.record_for(&q).unwrap();
        assert_eq!(rec.profile, canonicalize(&q).representative);
    }
}

#[test]
fn build_constraints_without_neighbours() {
    let empty: HashMap<Profile, KnownMatrix> = HashMap::new();
    let u = p("abcd|abcd|abcd|abcd");
    let cs = build_constraints(&u, &empty, 1).unwrap();
    assert!(cs.imports.is_empty());
    match rsdcert::exact::solve(&cs.system) {
        SolveOutcome::Unique(x) => assert!(x.iter().all(|v| *v == rational(1, 4))),
        other => panic!("{other:?}"),
    }
    let d = p("abcd|bacd|cabd|dabc");
    let cs = build_constraints(&d, &empty, 1).unwrap();
    match rsdcert::exact::solve(&cs.system) {
        SolveOutcome::Unique(x) => assert_eq!(x, rsd(&d).unwrap().entries()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn twelve_import_groups_when_every_swap_lowers_d() {
    // a profile every adjacent swap of which lowers the disagreement parameter
    let q = p("abcd|dcba|abcd|dcba");
    let lower: Vec<Profile> = all_swaps(4, 4).map(|s| apply_swap(&q, s).unwrap()).collect();
    assert!(lower
        .iter()
        .all(|x| x.disagreement_parameter() < q.disagreement_parameter()));
    let db = rsd_db(lower);
    let cs = build_constraints(&q, &db, 1).unwrap();
    let groups: std::collections::BTreeSet<_> = cs.imports.iter().map(|i| i.swap).collect();
    assert_eq!(groups.len(), 12);
    let pairs = cs
        .imports
        .iter()
        .filter(|i| matches!(i.cells, ImportCells::PairSum { .. }))
        .count();
    assert_eq!(pairs, 12);
}

#[test]
fn near_unanimous_profiles_resolve_from_lower_levels() {
    // lower-level profiles are given their RSD matrices (only neighbours are
    // ever read); the profile itself must then be pinned by its own axioms
    // and single-swap imports
    let r = report();
    let mut checked = 0;
    for rec in r.records().iter().filter(|x| is_near_unanimous(&x.profile)) {
        let d = rec.level;
        let lower = all_swaps(4, 4)
            .map(|s| apply_swap(&rec.profile, s).unwrap())
            .filter(|x| x.disagreement_parameter() < d);
        let db = rsd_db(lower);
        let cs = build_constraints(&rec.profile, &db, 1).unwrap();
        match rsdcert::exact::solve(&cs.system) {
            SolveOutcome::Unique(x) => assert_eq!(x, rsd(&rec.profile).unwrap().entries()),
            other => panic!("{}: {other:?}", rec.profile),
        }
        checked += 1;
    }
    assert!(checked > 0);
}

#[test]
fn reports_are_identical_across_thread_counts() {
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let r = verify_theorem(4, 4).unwrap();
            let mut out = Vec::new();
            r.write_jsonl(&mut out).unwrap();
            r.write_summary_csv(&mut out).unwrap();
            out
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn summary_counts() {
    let r = report();
    let s = r.summary();
    assert_eq!(s.iter().map(|x| x.profiles).sum::<usize>(), 762);
    assert_eq!(s.iter().map(|x| x.unique).sum::<usize>(), 762);
    assert!(s.windows(2).all(|w| w[0].level < w[1].level));
    let mut csv = Vec::new();
    r.write_summary_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("level,profiles,"));
    assert_eq!(text.lines().count(), s.len() + 1);
}

#[test]
fn jsonl_records_are_well_formed() {
    let r = verify_theorem(3, 3).unwrap();
    let mut out = Vec::new();
    r.write_jsonl(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 10);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in [
            "profile",
            "D",
            "orbit_size",
            "near_unanimous",
            "degenerate",
            "outcome",
            "matrix",
            "certificate",
            "round",
        ] {
            assert!(v.get(key).is_some(), "{key} missing");
        }
        assert!(v["supported"].is_null());
        assert_eq!(v["outcome"]["kind"], "UniqueEqualsRSD");
    }
    let cert: rsdcert::verifier::DeterminationCertificate = serde_json::from_value(
        serde_json::from_str::<serde_json::Value>(text.lines().last().unwrap()).unwrap()["certificate"].clone(),
    )
    .unwrap();
    replay_certificate(&cert, r.database()).unwrap();
}

#[test]
fn experimental_three_by_four_runs() {
    let r = verify_theorem(3, 4).unwrap();
    let total: u64 = r.records().iter().map(|x| x.orbit_size).sum();
    assert_eq!(total, 24u64.pow(3));
    // every profile the engine does settle agrees with RSD
    for rec in r.records() {
        assert!(!matches!(
            rec.outcome,
            Outcome::UniqueDiffersFromRSD { .. } | Outcome::Infeasible
        ));
        if let Some(cert) = &rec.certificate {
            replay_certificate(cert, r.database()).unwrap();
        }
    }
}
