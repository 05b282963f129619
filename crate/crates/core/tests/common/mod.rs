//! Test-side oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use recipe_temporal::adaptation::TaggedNetwork;
use recipe_temporal::allen::{realize_small, BaseRelation, Relation};
use recipe_temporal::metric::Limit;

/// Classifies two intervals by comparing endpoints directly.
pub fn classify(x: (i32, i32), y: (i32, i32)) -> &'static str {
    let ((xs, xe), (ys, ye)) = (x, y);
    if xe < ys {
        "b"
    } else if xe == ys {
        "m"
    } else if ye < xs {
        "bi"
    } else if ye == xs {
        "mi"
    } else if xs == ys && xe == ye {
        "e"
    } else if xs == ys {
        if xe < ye {
            "s"
        } else {
            "si"
        }
    } else if xe == ye {
        if xs > ys {
            "f"
        } else {
            "fi"
        }
    } else if xs > ys && xe < ye {
        "d"
    } else if xs < ys && xe > ye {
        "di"
    } else if xs < ys {
        "o"
    } else {
        "oi"
    }
}

pub fn atom(name: &str) -> BaseRelation {
    *BaseRelation::ALL.iter().find(|a| a.name() == name).unwrap()
}

/// Every interval with endpoints in `0..6`; three such intervals cover all
/// weak orders on six endpoints.
pub fn intervals() -> Vec<(i32, i32)> {
    (0..6).flat_map(|s| (s + 1..6).map(move |e| (s, e))).collect()
}

/// `(r1, r2) -> {r3}` from every triple of intervals.
pub fn composition_oracle() -> BTreeMap<(BaseRelation, BaseRelation), Relation> {
    let ivs = intervals();
    let mut table = BTreeMap::new();
    for &x in &ivs {
        for &y in &ivs {
            let r1 = atom(classify(x, y));
            for &z in &ivs {
                let r2 = atom(classify(y, z));
                let r3 = atom(classify(x, z));
                let cell = table.entry((r1, r2)).or_insert(Relation::EMPTY);
                *cell = cell.with(r3);
            }
        }
    }
    table
}


/// An upper bound `X[to] − X[from] ≤ value` (strict if flagged).
#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub value: i64,
    pub strict: bool,
}

/// `(sum, strict)` ordered so that a strict bound is tighter.
pub fn less(a: (i64, bool), b: (i64, bool)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 && !b.1)
}

pub fn out_edges(edges: &[Edge], from: usize) -> impl Iterator<Item = &Edge> {
    edges.iter().filter(move |e| e.from == from)
}

/// Enumerates every simple path from `at` (and every simple cycle back to
/// `origin`), tracking the tightest path bound and any negative cycle.
pub fn walk(
    edges: &[Edge],
    origin: usize,
    at: usize,
    sum: (i64, bool),
    seen: &mut Vec<bool>,
    best: &mut [Option<(i64, bool)>],
    negative: &mut bool,
) {
    for e in out_edges(edges, at) {
        let s = (sum.0 + e.value, sum.1 || e.strict);
        if e.to == origin {
            if less(s, (0, false)) {
                *negative = true;
            }
            continue;
        }
        if seen[e.to] {
            continue;
        }
        if best[e.to].is_none_or(|b| less(s, b)) {
            best[e.to] = Some(s);
        }
        seen[e.to] = true;
        walk(edges, origin, e.to, s, seen, best, negative);
        seen[e.to] = false;
    }
}

/// Tightest upper bound on every difference, or `None` if some cycle is
/// negative (or zero with a strict edge).
pub fn path_oracle(n: usize, edges: &[Edge]) -> Option<Vec<Vec<Option<(i64, bool)>>>> {
    let mut table = Vec::new();
    let mut negative = false;
    for origin in 0..n {
        let mut best = vec![None; n];
        let mut seen = vec![false; n];
        seen[origin] = true;
        walk(edges, origin, origin, (0, false), &mut seen, &mut best, &mut negative);
        table.push(best);
    }
    (!negative).then_some(table)
}

pub fn limit(b: (i64, bool)) -> Limit {
    if b.1 {
        Limit::open(b.0)
    } else {
        Limit::closed(b.0)
    }
}


pub fn realizable(t: &TaggedNetwork, keep: &[usize]) -> bool {
    realize_small(t.build(keep.iter().copied()).qcn()).unwrap().is_some()
}

/// The subset revise should pick: maximum size, then inclusion preferred
/// in id order.
pub fn revision_oracle(t: &TaggedNetwork) -> Option<Vec<usize>> {
    let n = t.soft.len();
    let mut best: Option<Vec<usize>> = None;
    for mask in 0u32..(1 << n) {
        let keep: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
        if !realizable(t, &keep) {
            continue;
        }
        let better = match &best {
            None => true,
            Some(b) => keep.len() > b.len() || (keep.len() == b.len() && prefers(&keep, b)),
        };
        if better {
            best = Some(keep);
        }
    }
    best
}

/// Does `x` include an index that `y` skips before the first difference?
pub fn prefers(x: &[usize], y: &[usize]) -> bool {
    for (a, b) in x.iter().zip(y) {
        if a != b {
            return a < b;
        }
    }
    false
}
