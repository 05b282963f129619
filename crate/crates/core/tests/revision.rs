//! Revision against exhaustive subset enumeration.

use proptest::prelude::*;
use proptest::test_runner::Config;

use recipe_temporal::adaptation::{revise, AdaptError, Provenance, TaggedConstraint, TaggedNetwork};
use recipe_temporal::allen::{realize_small, BaseRelation::*, Relation};
use recipe_temporal::metric::{end_id, start_id, BoundWindow, HybridNetwork};

mod common;
use common::revision_oracle as oracle;

const IDS: [&str; 4] = ["a", "b", "c", "d"];

fn skeleton() -> HybridNetwork {
    let mut h = HybridNetwork::new();
    for id in IDS {
        h.add_interval(id).unwrap();
    }
    h
}

fn any_relation() -> impl Strategy<Value = Relation> {
    prop::collection::vec(0usize..13, 1..=3)
        .prop_map(|atoms| atoms.into_iter().fold(Relation::EMPTY, |r, k| r.with(Relation::FULL.atoms().nth(k).unwrap())))
}

fn any_pair() -> impl Strategy<Value = (usize, usize)> {
    (0usize..4, 0usize..4).prop_filter("distinct", |(i, j)| i != j)
}

fn any_tagged() -> impl Strategy<Value = TaggedNetwork> {
    (
        prop::collection::vec((any_pair(), any_relation()), 0..=6),
        prop::collection::vec((any_pair(), any_relation()), 0..=3),
    )
        .prop_map(|(soft, hard)| {
            let mut h = skeleton();
            for ((i, j), r) in soft {
                h.constrain_allen(IDS[i], IDS[j], r).unwrap();
            }
            let mut t = TaggedNetwork::from_recipe(&h);
            t.hard = hard
                .into_iter()
                .map(|((i, j), r)| TaggedConstraint::allen(IDS[i], IDS[j], r, Provenance::DomainHard))
                .collect();
            t
        })
}

proptest! {
    #![proptest_config(Config { cases: 200, failure_persistence: None, ..Config::default() })]

    #[test]
    fn revision_is_cardinality_maximal(t in any_tagged()) {
        prop_assume!(t.soft.len() <= 10);
        let mut sorted = t.clone();
        sorted.soft.sort_by(|a, b| a.id.cmp(&b.id));
        match (revise(&t), oracle(&sorted)) {
            (Err(AdaptError::HardInconsistent), None) => {}
            (Ok(r), Some(keep)) => {
                let want: Vec<&str> = keep.iter().map(|&k| sorted.soft[k].id.as_str()).collect();
                let got: Vec<&str> = r.retained.iter().map(|c| c.id.as_str()).collect();
                prop_assert_eq!(got, want);
                prop_assert_eq!(r.retained.len() + r.relaxed.len(), t.soft.len());
                prop_assert_eq!(r.hard.len(), t.hard.len());
                prop_assert!(realize_small(r.network.qcn()).unwrap().is_some());
                // the witness refines the revised network
                for (i, j) in r.network.qcn().pairs() {
                    prop_assert!(r.witness.qcn.get(i, j).is_subset(r.network.qcn().get(i, j)));
                }
            }
            (got, want) => prop_assert!(false, "revise {:?} vs oracle {:?}", got.map(|r| r.retained.len()), want),
        }
    }
}

#[test]
fn joint_conflict_relaxes_the_larger_id() {
    // hard: a before c. soft: a after b, b after c. Either soft one alone is
    // fine; together they force c before a.
    let mut h = skeleton();
    h.constrain_allen("a", "b", Relation::atom(After)).unwrap();
    h.constrain_allen("b", "c", Relation::atom(After)).unwrap();
    let mut t = TaggedNetwork::from_recipe(&h);
    t.hard.push(TaggedConstraint::allen("a", "c", Relation::atom(Before), Provenance::DomainHard));
    let r = revise(&t).unwrap();
    let ids = |cs: &[TaggedConstraint]| cs.iter().map(|c| c.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&r.retained), ["allen:a|b"]);
    assert_eq!(ids(&r.relaxed), ["allen:b|c"]);
    assert_eq!(oracle(&t), Some(vec![0]));
}

#[test]
fn metric_conflict_relaxes_the_duration() {
    // a lasts 10, b lasts 30, a contains b: the last id in order goes
    let mut h = skeleton();
    h.constrain_allen("a", "b", Relation::atom(Contains)).unwrap();
    h.constrain_metric(&start_id("a"), &end_id("a"), BoundWindow::exact(10)).unwrap();
    h.constrain_metric(&start_id("b"), &end_id("b"), BoundWindow::exact(30)).unwrap();
    let t = TaggedNetwork::from_recipe(&h);
    let r = revise(&t).unwrap();
    assert_eq!(r.relaxed.len(), 1);
    assert!(r.network.is_consistent());
    assert_eq!(r.relaxed[0].id, "metric:b+|b-");
}

#[test]
fn consistent_input_keeps_everything() {
    let mut h = skeleton();
    for w in IDS.windows(2) {
        h.constrain_allen(w[0], w[1], Relation::of(&[Before, Meets])).unwrap();
    }
    let r = revise(&TaggedNetwork::from_recipe(&h)).unwrap();
    assert!(r.relaxed.is_empty());
    assert_eq!(r.retained.len(), 3);
}
