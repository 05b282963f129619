//! Metric constraints over time points (`lo ≤ Xj − Xi ≤ hi`, possibly with
//! strict bounds), simple and disjunctive temporal problems, and the hybrid
//! network combining them with Allen constraints on intervals.
//!
//! All quantities are exact rationals, in minutes when they come from recipe
//! text. Strict bounds are carried as flags through shortest paths; there is
//! no epsilon anywhere.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;
use std::sync::OnceLock;

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::allen::{BaseRelation, Qcn, Relation};
use crate::network::{Closure, NetworkError};

pub type Minutes = Rational64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("unknown time point `{0}`")]
    UnknownPoint(String),
    #[error("duplicate time point `{0}`")]
    DuplicatePoint(String),
    #[error("empty window: lower bound {lo} exceeds upper bound {hi}")]
    EmptyWindow { lo: String, hi: String },
    #[error("a disjunctive constraint needs at least one window")]
    NoWindows,
    #[error("scale bound exceeded: {0}")]
    ScaleBound(String),
    #[error("malformed window `{0}`")]
    MalformedWindow(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// An upper bound on a difference: `≤ value`, or `< value` when strict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Limit {
    pub value: Minutes,
    pub strict: bool,
}

impl Limit {
    pub fn closed(value: impl Into<Minutes>) -> Self {
        Limit {
            value: value.into(),
            strict: false,
        }
    }

    pub fn open(value: impl Into<Minutes>) -> Self {
        Limit {
            value: value.into(),
            strict: true,
        }
    }

    fn neg(self) -> Self {
        Limit {
            value: -self.value,
            strict: self.strict,
        }
    }
}

impl Ord for Limit {
    /// `< v` is tighter than `≤ v`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .cmp(&other.value)
            .then_with(|| other.strict.cmp(&self.strict))
    }
}

impl PartialOrd for Limit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Limit {
    type Output = Limit;

    fn add(self, rhs: Limit) -> Limit {
        Limit {
            value: self.value + rhs.value,
            strict: self.strict || rhs.strict,
        }
    }
}

/// Edge weight in the distance graph; `None` is +∞.
type Weight = Option<Limit>;

fn add_w(a: Weight, b: Weight) -> Weight {
    Some(a? + b?)
}

fn tighter(a: Weight, b: Weight) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        (None, _) => false,
    }
}

/// The set of admissible values of one difference `to − from`. A missing
/// bound is infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoundWindow {
    /// Lower bound, as `≥ value` or `> value` when strict.
    pub lo: Option<Limit>,
    pub hi: Option<Limit>,
}

impl BoundWindow {
    pub const UNBOUNDED: BoundWindow = BoundWindow { lo: None, hi: None };

    pub fn new(lo: Option<Limit>, hi: Option<Limit>) -> Result<Self, MetricError> {
        let w = BoundWindow { lo, hi };
        if w.is_empty() {
            return Err(MetricError::EmptyWindow {
                lo: fmt_lo(lo),
                hi: fmt_hi(hi),
            });
        }
        Ok(w)
    }

    /// `[lo, hi]`.
    pub fn closed(lo: impl Into<Minutes>, hi: impl Into<Minutes>) -> Result<Self, MetricError> {
        Self::new(Some(Limit::closed(lo)), Some(Limit::closed(hi)))
    }

    /// `[v, v]`.
    pub fn exact(v: impl Into<Minutes>) -> Self {
        let v = v.into();
        BoundWindow {
            lo: Some(Limit::closed(v)),
            hi: Some(Limit::closed(v)),
        }
    }

    /// `(0, ∞)`: strictly positive.
    pub fn positive() -> Self {
        BoundWindow {
            lo: Some(Limit::open(0)),
            hi: None,
        }
    }

    /// `(0, hi]`.
    pub fn up_to(hi: impl Into<Minutes>) -> Result<Self, MetricError> {
        Self::new(Some(Limit::open(0)), Some(Limit::closed(hi)))
    }

    pub fn is_unbounded(&self) -> bool {
        self.lo.is_none() && self.hi.is_none()
    }

    pub fn is_empty(&self) -> bool {
        match (self.lo, self.hi) {
            (Some(lo), Some(hi)) => match lo.value.cmp(&hi.value) {
                Ordering::Greater => true,
                Ordering::Equal => lo.strict || hi.strict,
                Ordering::Less => false,
            },
            _ => false,
        }
    }

    pub fn contains(&self, v: Minutes) -> bool {
        let above = self
            .lo
            .is_none_or(|l| if l.strict { v > l.value } else { v >= l.value });
        let below = self
            .hi
            .is_none_or(|h| if h.strict { v < h.value } else { v <= h.value });
        above && below
    }

    /// The window of `from − to`.
    pub fn reversed(&self) -> Self {
        BoundWindow {
            lo: self.hi.map(Limit::neg),
            hi: self.lo.map(Limit::neg),
        }
    }

    /// Intersection; may be empty.
    pub fn intersect(&self, other: &Self) -> Self {
        let lo = match (self.lo, other.lo) {
            // larger lower bound, strict wins ties
            (Some(a), Some(b)) => Some(if a.neg() < b.neg() { a } else { b }),
            (a, None) => a,
            (None, b) => b,
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        BoundWindow { lo, hi }
    }

    /// Is every value of `self` admitted by `other`?
    pub fn is_subset(&self, other: &Self) -> bool {
        self.intersect(other) == *self || self.is_empty()
    }

    /// Can `self ∪ next` be written as one window? `self` must not start
    /// after `next`.
    fn joins(&self, next: &Self) -> bool {
        match (self.hi, next.lo) {
            (None, _) | (_, None) => true,
            (Some(h), Some(l)) => match h.value.cmp(&l.value) {
                Ordering::Greater => true,
                Ordering::Equal => !(h.strict && l.strict),
                Ordering::Less => false,
            },
        }
    }

    fn hull(&self, other: &Self) -> Self {
        let lo = match (self.lo, other.lo) {
            (Some(a), Some(b)) => Some(if a.neg() > b.neg() { a } else { b }),
            _ => None,
        };
        let hi = match (self.hi, other.hi) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        BoundWindow { lo, hi }
    }
}

pub fn fmt_minutes(v: Minutes) -> String {
    if v.is_integer() {
        v.to_integer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn fmt_lo(lo: Option<Limit>) -> String {
    match lo {
        None => "(-inf".into(),
        Some(l) => format!("{}{}", if l.strict { "(" } else { "[" }, fmt_minutes(l.value)),
    }
}

fn fmt_hi(hi: Option<Limit>) -> String {
    match hi {
        None => "inf)".into(),
        Some(h) => format!("{}{}", fmt_minutes(h.value), if h.strict { ")" } else { "]" }),
    }
}

impl fmt::Display for BoundWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", fmt_lo(self.lo), fmt_hi(self.hi))
    }
}

pub fn parse_minutes(s: &str) -> Option<Minutes> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            (d != 0).then(|| Minutes::new(n, d))
        }
        None => Some(Minutes::from_integer(s.parse().ok()?)),
    }
}

impl FromStr for BoundWindow {
    type Err = MetricError;

    /// Parses `[lo, hi]`, `(lo, hi)`, mixed brackets, and `inf`/`-inf`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MetricError::MalformedWindow(s.to_string());
        let t = s.trim();
        let lo_strict = match t.chars().next() {
            Some('[') => false,
            Some('(') => true,
            _ => return Err(bad()),
        };
        let hi_strict = match t.chars().last() {
            Some(']') => false,
            Some(')') => true,
            _ => return Err(bad()),
        };
        let (a, b) = t[1..t.len() - 1].split_once(',').ok_or_else(bad)?;
        let lo = match a.trim() {
            "-inf" => None,
            v => Some(Limit {
                value: parse_minutes(v).ok_or_else(bad)?,
                strict: lo_strict,
            }),
        };
        let hi = match b.trim() {
            "inf" | "+inf" => None,
            v => Some(Limit {
                value: parse_minutes(v).ok_or_else(bad)?,
                strict: hi_strict,
            }),
        };
        BoundWindow::new(lo, hi)
    }
}

/// What a time point stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PointRole {
    Start(String),
    End(String),
    Anonymous,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TimePoint {
    pub id: String,
    pub role: PointRole,
}

pub fn start_id(interval: &str) -> String {
    format!("{interval}-")
}

pub fn end_id(interval: &str) -> String {
    format!("{interval}+")
}

/// A disjunction of windows on `to − from`. Windows are kept sorted and
/// pairwise disjoint; overlapping inputs are merged.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricConstraint {
    pub from: String,
    pub to: String,
    windows: Vec<BoundWindow>,
}

impl MetricConstraint {
    pub fn new(
        from: impl Into<String>,
        to: impl Into<String>,
        windows: impl IntoIterator<Item = BoundWindow>,
    ) -> Result<Self, MetricError> {
        let mut ws: Vec<BoundWindow> = windows.into_iter().filter(|w| !w.is_empty()).collect();
        if ws.is_empty() {
            return Err(MetricError::NoWindows);
        }
        ws.sort_by(|a, b| match (a.lo, b.lo) {
            (None, None) => Ordering::Equal,
            (None, _) => Ordering::Less,
            (_, None) => Ordering::Greater,
            (Some(x), Some(y)) => x.neg().cmp(&y.neg()).reverse(),
        });
        let mut merged: Vec<BoundWindow> = Vec::with_capacity(ws.len());
        for w in ws {
            match merged.last_mut() {
                Some(last) if last.joins(&w) => *last = last.hull(&w),
                _ => merged.push(w),
            }
        }
        Ok(MetricConstraint {
            from: from.into(),
            to: to.into(),
            windows: merged,
        })
    }

    pub fn windows(&self) -> &[BoundWindow] {
        &self.windows
    }
}

impl fmt::Display for MetricConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {} in ", self.to, self.from)?;
        for (i, w) in self.windows.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{w}")?;
        }
        Ok(())
    }
}

/// A simple temporal problem: time points and at most one window per pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stp {
    points: Vec<TimePoint>,
    /// Asserted windows on `X[j] − X[i]`, keyed with `i < j`.
    windows: BTreeMap<(usize, usize), BoundWindow>,
}

impl Stp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[TimePoint] {
        &self.points
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    pub fn require(&self, id: &str) -> Result<usize, MetricError> {
        self.index_of(id)
            .ok_or_else(|| MetricError::UnknownPoint(id.to_string()))
    }

    pub fn add_point(&mut self, id: impl Into<String>, role: PointRole) -> Result<usize, MetricError> {
        let id = id.into();
        if self.index_of(&id).is_some() {
            return Err(MetricError::DuplicatePoint(id));
        }
        self.points.push(TimePoint { id, role });
        Ok(self.points.len() - 1)
    }

    /// Conjoins `to − from ∈ window` with whatever is already asserted on
    /// the pair. The stored window may become empty; closure reports it.
    pub fn constrain(&mut self, from: usize, to: usize, window: BoundWindow) {
        let (key, w) = if from < to {
            ((from, to), window)
        } else {
            ((to, from), window.reversed())
        };
        let cell = self.windows.entry(key).or_insert(BoundWindow::UNBOUNDED);
        *cell = cell.intersect(&w);
    }

    pub fn constrain_named(&mut self, from: &str, to: &str, window: BoundWindow) -> Result<(), MetricError> {
        let (f, t) = (self.require(from)?, self.require(to)?);
        self.constrain(f, t, window);
        Ok(())
    }

    /// The asserted window on `to − from` (unbounded if none).
    pub fn asserted(&self, from: usize, to: usize) -> BoundWindow {
        if from < to {
            self.windows.get(&(from, to)).copied().unwrap_or(BoundWindow::UNBOUNDED)
        } else {
            self.windows
                .get(&(to, from))
                .map(BoundWindow::reversed)
                .unwrap_or(BoundWindow::UNBOUNDED)
        }
    }

    /// Asserted constraints as `(from, to, window)` with `from < to` by index.
    pub fn constraints(&self) -> impl Iterator<Item = (usize, usize, BoundWindow)> + '_ {
        self.windows.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn clear(&mut self, from: usize, to: usize) {
        let key = if from < to { (from, to) } else { (to, from) };
        self.windows.remove(&key);
    }

    /// Drops points and every constraint mentioning them.
    pub fn remove_points(&self, drop: &[usize]) -> Stp {
        let keep: Vec<usize> = (0..self.points.len()).filter(|i| !drop.contains(i)).collect();
        let remap: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let mut out = Stp {
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            windows: BTreeMap::new(),
        };
        for (&(i, j), &w) in &self.windows {
            if let (Some(&a), Some(&b)) = (remap.get(&i), remap.get(&j)) {
                out.constrain(a, b, w);
            }
        }
        out
    }

    fn distance_matrix(&self) -> Vec<Weight> {
        let n = self.points.len();
        let mut d: Vec<Weight> = vec![None; n * n];
        for i in 0..n {
            d[i * n + i] = Some(Limit::closed(0));
        }
        for (&(i, j), w) in &self.windows {
            // X[j] − X[i] ≤ hi ; X[i] − X[j] ≤ −lo
            if let Some(h) = w.hi {
                let e = &mut d[i * n + j];
                if tighter(Some(h), *e) {
                    *e = Some(h);
                }
            }
            if let Some(l) = w.lo {
                let e = &mut d[j * n + i];
                if tighter(Some(l.neg()), *e) {
                    *e = Some(l.neg());
                }
            }
        }
        d
    }

    /// All-pairs shortest paths over `(value, strictness)` weights. A cycle
    /// of negative weight, or of zero weight through a strict edge, means
    /// inconsistency.
    pub fn close(&self) -> StpClosure {
        let n = self.points.len();
        let mut d = self.distance_matrix();
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik.is_none() {
                    continue;
                }
                for j in 0..n {
                    let via = add_w(dik, d[k * n + j]);
                    if tighter(via, d[i * n + j]) {
                        d[i * n + j] = via;
                    }
                }
            }
            if (0..n).any(|i| tighter(d[i * n + i], Some(Limit::closed(0)))) {
                return StpClosure::Inconsistent;
            }
        }
        StpClosure::Consistent(MinimalStp {
            points: self.points.clone(),
            dist: d,
        })
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self.close(), StpClosure::Consistent(_))
    }

    /// Asserted constraints in text form, one per line, sorted.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self
            .constraints()
            .map(|(i, j, w)| {
                let (from, to, w) = orient(&self.points[i].id, &self.points[j].id, w);
                format!("{to} - {from} in {w}")
            })
            .collect();
        lines.sort();
        lines.into_iter().map(|l| l + "\n").collect()
    }
}

/// Orients a window so that `from` is the lexicographically smaller id.
fn orient<'a>(a: &'a str, b: &'a str, w: BoundWindow) -> (&'a str, &'a str, BoundWindow) {
    if a <= b {
        (a, b, w)
    } else {
        (b, a, w.reversed())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StpClosure {
    Consistent(MinimalStp),
    Inconsistent,
}

impl StpClosure {
    pub fn is_consistent(&self) -> bool {
        matches!(self, StpClosure::Consistent(_))
    }
}

/// The minimal network: the tightest implied window for every pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalStp {
    points: Vec<TimePoint>,
    dist: Vec<Weight>,
}

impl MinimalStp {
    pub fn points(&self) -> &[TimePoint] {
        &self.points
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    /// Implied window on `X[to] − X[from]`.
    pub fn window(&self, from: usize, to: usize) -> BoundWindow {
        let n = self.points.len();
        BoundWindow {
            lo: self.dist[to * n + from].map(Limit::neg),
            hi: self.dist[from * n + to],
        }
    }

    pub fn window_named(&self, from: &str, to: &str) -> Result<BoundWindow, MetricError> {
        let f = self
            .index_of(from)
            .ok_or_else(|| MetricError::UnknownPoint(from.to_string()))?;
        let t = self
            .index_of(to)
            .ok_or_else(|| MetricError::UnknownPoint(to.to_string()))?;
        Ok(self.window(f, t))
    }

    /// The minimal network as an STP asserting every implied finite window.
    pub fn to_stp(&self) -> Stp {
        let mut s = Stp {
            points: self.points.clone(),
            windows: BTreeMap::new(),
        };
        let n = self.points.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.window(i, j);
                if !w.is_unbounded() {
                    s.windows.insert((i, j), w);
                }
            }
        }
        s
    }

    /// Consistency of the sub-network on `pts` with extra constraints added.
    /// Exact because minimal STP networks are decomposable.
    fn admits(&self, pts: &[usize], extra: &[(usize, usize, BoundWindow)]) -> bool {
        let mut sub = Stp::new();
        for (k, &p) in pts.iter().enumerate() {
            sub.points.push(TimePoint {
                id: k.to_string(),
                role: self.points[p].role.clone(),
            });
        }
        for a in 0..pts.len() {
            for b in (a + 1)..pts.len() {
                let w = self.window(pts[a], pts[b]);
                if !w.is_unbounded() {
                    sub.constrain(a, b, w);
                }
            }
        }
        for &(a, b, w) in extra {
            sub.constrain(a, b, w);
        }
        sub.is_consistent()
    }
}

/// Disjunctive temporal problem: each constraint offers several windows.
#[derive(Clone, Debug, Default)]
pub struct Tcsp {
    pub points: Vec<String>,
    pub constraints: Vec<MetricConstraint>,
}

pub const TCSP_MAX_WINDOWS: usize = 4;
pub const TCSP_MAX_DISJUNCTIVE: usize = 12;

impl Tcsp {
    /// Searches window selections in constraint order, then window order,
    /// pruning on STP inconsistency. Returns the first consistent selection.
    pub fn solve(&self) -> Result<Option<Stp>, MetricError> {
        if let Some(c) = self.constraints.iter().find(|c| c.windows.len() > TCSP_MAX_WINDOWS) {
            return Err(MetricError::ScaleBound(format!(
                "constraint {c} has {} windows (max {TCSP_MAX_WINDOWS})",
                c.windows.len()
            )));
        }
        let disjunctive = self.constraints.iter().filter(|c| c.windows.len() > 1).count();
        if disjunctive > TCSP_MAX_DISJUNCTIVE {
            return Err(MetricError::ScaleBound(format!(
                "{disjunctive} disjunctive constraints (max {TCSP_MAX_DISJUNCTIVE})"
            )));
        }
        let mut base = Stp::new();
        for p in &self.points {
            base.add_point(p.clone(), PointRole::Anonymous)?;
        }
        let mut resolved = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            resolved.push((base.require(&c.from)?, base.require(&c.to)?, c.windows.as_slice()));
        }

        fn search(stp: &Stp, rest: &[(usize, usize, &[BoundWindow])]) -> Option<Stp> {
            let Some((&(from, to, windows), tail)) = rest.split_first() else {
                return Some(stp.clone());
            };
            for &w in windows {
                let mut next = stp.clone();
                next.constrain(from, to, w);
                if next.is_consistent() {
                    if let Some(found) = search(&next, tail) {
                        return Some(found);
                    }
                }
            }
            None
        }

        Ok(search(&base, &resolved))
    }
}

/// Endpoint of the pair `(x, y)` in an Allen atom's point translation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    XStart,
    XEnd,
    YStart,
    YEnd,
}

impl Endpoint {
    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Endpoint::XStart => "x-",
            Endpoint::XEnd => "x+",
            Endpoint::YStart => "y-",
            Endpoint::YEnd => "y+",
        })
    }
}

/// `to − from ∈ window`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointConstraint {
    pub from: Endpoint,
    pub to: Endpoint,
    pub window: BoundWindow,
}

impl fmt::Display for PointConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {} in {}", self.to, self.from, self.window)
    }
}

const CROSS_PAIRS: [(Endpoint, Endpoint); 4] = [
    (Endpoint::XStart, Endpoint::YStart),
    (Endpoint::XStart, Endpoint::YEnd),
    (Endpoint::XEnd, Endpoint::YStart),
    (Endpoint::XEnd, Endpoint::YEnd),
];

/// How each x endpoint compares with each y endpoint under `atom`, in
/// `CROSS_PAIRS` order. Read off a concrete witness of the atom.
fn endpoint_orders(atom: BaseRelation) -> [Ordering; 4] {
    static TABLE: OnceLock<[[Ordering; 4]; 13]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [[Ordering::Equal; 4]; 13];
        let mut found = [false; 13];
        for xs in 0..4 {
            for xe in (xs + 1)..4 {
                for ys in 0..4 {
                    for ye in (ys + 1)..4 {
                        let a = BaseRelation::of((xs, xe), (ys, ye)).index();
                        if !found[a] {
                            found[a] = true;
                            table[a] = [xs.cmp(&ys), xs.cmp(&ye), xe.cmp(&ys), xe.cmp(&ye)];
                        }
                    }
                }
            }
        }
        table
    })[atom.index()]
}

fn order_constraint(from: Endpoint, to: Endpoint, ord: Ordering) -> PointConstraint {
    match ord {
        Ordering::Less => PointConstraint {
            from,
            to,
            window: BoundWindow::positive(),
        },
        Ordering::Equal => PointConstraint {
            from,
            to,
            window: BoundWindow::exact(0),
        },
        Ordering::Greater => PointConstraint {
            from: to,
            to: from,
            window: BoundWindow::positive(),
        },
    }
}

/// Window on `y − x` admitted by a set of point orderings of `x` vs `y`;
/// `None` when the set has no convex description tighter than ℝ.
fn hull_of_orders(less: bool, equal: bool, greater: bool) -> Option<BoundWindow> {
    let zero = Minutes::zero();
    match (less, equal, greater) {
        (true, false, false) => Some(BoundWindow::positive()),
        (true, true, false) => Some(BoundWindow {
            lo: Some(Limit::closed(zero)),
            hi: None,
        }),
        (false, true, false) => Some(BoundWindow::exact(zero)),
        (false, true, true) => Some(BoundWindow {
            lo: None,
            hi: Some(Limit::closed(zero)),
        }),
        (false, false, true) => Some(BoundWindow {
            lo: None,
            hi: Some(Limit::open(zero)),
        }),
        _ => None,
    }
}

fn stp_on_endpoints(extra: &[PointConstraint]) -> Stp {
    let mut s = Stp::new();
    for id in ["x-", "x+", "y-", "y+"] {
        s.add_point(id, PointRole::Anonymous).expect("fresh ids");
    }
    s.constrain(0, 1, BoundWindow::positive());
    s.constrain(2, 3, BoundWindow::positive());
    for c in extra {
        s.constrain(c.from.slot(), c.to.slot(), c.window);
    }
    s
}

/// The defining endpoint constraints of an Allen atom: the four cross
/// comparisons, minus those implied by the rest together with
/// `start < end` on both intervals.
pub fn allen_atom_to_points(atom: BaseRelation) -> Vec<PointConstraint> {
    let mut cs: Vec<PointConstraint> = CROSS_PAIRS
        .iter()
        .zip(endpoint_orders(atom))
        .map(|(&(x, y), ord)| order_constraint(x, y, ord))
        .collect();
    let mut k = 0;
    while k < cs.len() {
        let rest: Vec<PointConstraint> = cs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, c)| *c)
            .collect();
        let implied = match stp_on_endpoints(&rest).close() {
            StpClosure::Consistent(min) => min
                .window(cs[k].from.slot(), cs[k].to.slot())
                .is_subset(&cs[k].window),
            StpClosure::Inconsistent => true,
        };
        if implied {
            cs.remove(k);
        } else {
            k += 1;
        }
    }
    cs
}

/// Atoms between the intervals `(xs, xe)` and `(ys, ye)` (point indices in
/// `min`) whose endpoint constraints are jointly satisfiable with `min`.
pub fn metric_to_allen(min: &MinimalStp, x: (usize, usize), y: (usize, usize)) -> Relation {
    let pts = [x.0, x.1, y.0, y.1];
    let mut out = Relation::EMPTY;
    for atom in BaseRelation::ALL {
        let extra: Vec<(usize, usize, BoundWindow)> = CROSS_PAIRS
            .iter()
            .zip(endpoint_orders(atom))
            .map(|(&(a, b), ord)| {
                let c = order_constraint(a, b, ord);
                (c.from.slot(), c.to.slot(), c.window)
            })
            .collect();
        if min.admits(&pts, &extra) {
            out = out.with(atom);
        }
    }
    out
}

/// Allen constraints on intervals plus metric constraints on their
/// endpoints (and on free-standing points). Each interval `i` owns points
/// `i-` and `i+` with the implicit constraint `i+ − i- ∈ (0, ∞)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HybridNetwork {
    qcn: Qcn,
    stp: Stp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HybridClosure {
    Consistent(ClosedHybrid),
    Inconsistent,
}

impl HybridClosure {
    pub fn is_consistent(&self) -> bool {
        matches!(self, HybridClosure::Consistent(_))
    }

    pub fn closed(&self) -> Option<&ClosedHybrid> {
        match self {
            HybridClosure::Consistent(c) => Some(c),
            HybridClosure::Inconsistent => None,
        }
    }
}

/// Fixpoint of qualitative and metric propagation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedHybrid {
    pub qcn: Qcn,
    pub metric: MinimalStp,
}

impl ClosedHybrid {
    pub fn relation(&self, a: &str, b: &str) -> Result<Relation, MetricError> {
        Ok(self.qcn.relation(a, b)?)
    }

    /// Implied window on `to − from` for two named points.
    pub fn window(&self, from: &str, to: &str) -> Result<BoundWindow, MetricError> {
        self.metric.window_named(from, to)
    }

    pub fn duration(&self, interval: &str) -> Result<BoundWindow, MetricError> {
        self.window(&start_id(interval), &end_id(interval))
    }

    /// Closed Allen cells followed by every finite implied window between
    /// distinct points, both sorted.
    pub fn to_text(&self) -> String {
        let mut out = self.qcn.to_text();
        let pts = self.metric.points();
        let mut lines = Vec::new();
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let w = self.metric.window(i, j);
                if w.is_unbounded() {
                    continue;
                }
                let (from, to, w) = orient(&pts[i].id, &pts[j].id, w);
                lines.push(format!("{to} - {from} in {w}\n"));
            }
        }
        lines.sort();
        out.extend(lines);
        out
    }
}

impl HybridNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn qcn(&self) -> &Qcn {
        &self.qcn
    }

    pub fn stp(&self) -> &Stp {
        &self.stp
    }

    pub fn intervals(&self) -> &[String] {
        self.qcn.names()
    }

    pub fn add_interval(&mut self, id: &str) -> Result<(), MetricError> {
        if self.stp.index_of(&start_id(id)).is_some() || self.stp.index_of(&end_id(id)).is_some() {
            return Err(MetricError::DuplicatePoint(id.to_string()));
        }
        self.qcn.add_interval(id)?;
        self.stp.add_point(start_id(id), PointRole::Start(id.to_string()))?;
        self.stp.add_point(end_id(id), PointRole::End(id.to_string()))?;
        Ok(())
    }

    pub fn add_point(&mut self, id: &str) -> Result<(), MetricError> {
        self.stp.add_point(id, PointRole::Anonymous).map(|_| ())
    }

    pub fn constrain_allen(&mut self, a: &str, b: &str, r: Relation) -> Result<Relation, MetricError> {
        Ok(self.qcn.constrain_named(a, b, r)?)
    }

    /// Overwrites the asserted Allen cell.
    pub fn set_allen(&mut self, a: &str, b: &str, r: Relation) -> Result<(), MetricError> {
        let (i, j) = (self.qcn.require(a)?, self.qcn.require(b)?);
        self.qcn.set(i, j, r);
        Ok(())
    }

    pub fn constrain_metric(&mut self, from: &str, to: &str, w: BoundWindow) -> Result<(), MetricError> {
        self.stp.constrain_named(from, to, w)
    }

    /// Overwrites the asserted window on `to − from`.
    pub fn set_metric(&mut self, from: &str, to: &str, w: BoundWindow) -> Result<(), MetricError> {
        let (f, t) = (self.stp.require(from)?, self.stp.require(to)?);
        self.stp.clear(f, t);
        self.stp.constrain(f, t, w);
        Ok(())
    }

    pub fn constrain_duration(&mut self, interval: &str, w: BoundWindow) -> Result<(), MetricError> {
        self.constrain_metric(&start_id(interval), &end_id(interval), w)
    }

    /// Removes intervals (with their endpoints) and anonymous points.
    pub fn remove(&self, ids: &[&str]) -> Result<HybridNetwork, MetricError> {
        let mut intervals = Vec::new();
        let mut drop_points = Vec::new();
        for &id in ids {
            if self.qcn.index_of(id).is_some() {
                intervals.push(id);
                drop_points.push(self.stp.require(&start_id(id))?);
                drop_points.push(self.stp.require(&end_id(id))?);
            } else {
                drop_points.push(self.stp.require(id)?);
            }
        }
        Ok(HybridNetwork {
            qcn: self.qcn.remove_intervals(&intervals)?,
            stp: self.stp.remove_points(&drop_points),
        })
    }

    fn endpoints(&self, i: usize) -> (usize, usize) {
        let name = &self.qcn.names()[i];
        (
            self.stp.index_of(&start_id(name)).expect("linked start"),
            self.stp.index_of(&end_id(name)).expect("linked end"),
        )
    }

    /// Metric problem implied by the asserted windows, the interval linkage,
    /// and the convex hull of each Allen cell's endpoint orderings.
    fn metric_view(&self, qcn: &Qcn) -> Stp {
        let mut stp = self.stp.clone();
        for i in 0..qcn.len() {
            let (s, e) = self.endpoints(i);
            stp.constrain(s, e, BoundWindow::positive());
        }
        for (i, j) in qcn.pairs() {
            let cell = qcn.get(i, j);
            if cell.is_full() {
                continue;
            }
            let (xs, xe) = self.endpoints(i);
            let (ys, ye) = self.endpoints(j);
            let pts = [(xs, ys), (xs, ye), (xe, ys), (xe, ye)];
            for (slot, &(p, q)) in pts.iter().enumerate() {
                let (mut lt, mut eq, mut gt) = (false, false, false);
                for atom in cell.atoms() {
                    match endpoint_orders(atom)[slot] {
                        Ordering::Less => lt = true,
                        Ordering::Equal => eq = true,
                        Ordering::Greater => gt = true,
                    }
                }
                if let Some(w) = hull_of_orders(lt, eq, gt) {
                    stp.constrain(p, q, w);
                }
            }
        }
        stp
    }

    /// Alternates Allen path consistency, Allen-to-metric tightening,
    /// shortest paths, and metric-to-Allen tightening until nothing changes.
    pub fn close(&self) -> HybridClosure {
        let mut qcn = self.qcn.clone();
        loop {
            qcn = match qcn.close() {
                Closure::Consistent(q) => q,
                Closure::Inconsistent(_) => return HybridClosure::Inconsistent,
            };
            let min = match self.metric_view(&qcn).close() {
                StpClosure::Consistent(m) => m,
                StpClosure::Inconsistent => return HybridClosure::Inconsistent,
            };
            let mut changed = false;
            for (i, j) in qcn.pairs() {
                let old = qcn.get(i, j);
                let new = old.intersect(metric_to_allen(&min, self.endpoints(i), self.endpoints(j)));
                if new.is_empty() {
                    return HybridClosure::Inconsistent;
                }
                if new != old {
                    qcn.set(i, j, new);
                    changed = true;
                }
            }
            if !changed {
                return HybridClosure::Consistent(ClosedHybrid { qcn, metric: min });
            }
        }
    }

    /// Complete consistency check: backtracks over Allen atoms with hybrid
    /// closure as pruning. With every cell atomic, the metric view is an
    /// exact description of the scenario, so a consistent leaf is realizable.
    pub fn atomic_scenario(&self) -> Option<ClosedHybrid> {
        let HybridClosure::Consistent(closed) = self.close() else {
            return None;
        };
        let Some((i, j)) = closed.qcn.pairs().find(|&(i, j)| closed.qcn.get(i, j).len() > 1) else {
            return Some(closed);
        };
        for atom in closed.qcn.get(i, j).atoms() {
            let mut next = HybridNetwork {
                qcn: closed.qcn.clone(),
                stp: self.stp.clone(),
            };
            next.qcn.set(i, j, atom.into());
            if let Some(found) = next.atomic_scenario() {
                return Some(found);
            }
        }
        None
    }

    pub fn is_consistent(&self) -> bool {
        self.atomic_scenario().is_some()
    }

    /// Asserted Allen cells, then asserted metric windows.
    pub fn to_text(&self) -> String {
        let mut out = self.qcn.to_text();
        out.push_str(&self.stp.to_text());
        out
    }
}
