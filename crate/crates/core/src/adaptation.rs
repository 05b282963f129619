//! Revision-based adaptation: drop the replaced nodes, add domain knowledge
//! as hard constraints, and keep as many recipe constraints as consistency
//! allows.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::allen::{BaseRelation, Relation};
use crate::annotation::KnowledgeDoc;
use crate::metric::{BoundWindow, ClosedHybrid, HybridClosure, HybridNetwork, MetricError, PointRole};
use crate::recipe::{encode_into, ActionKind, EncodeMode, EncodeOptions, Recipe, RecipeError, Span};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdaptError {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("anchor `{0}` does not exist in the target network")]
    UnresolvedAnchor(String),
    #[error("knowledge node `{0}` already exists in the target network")]
    DuplicateNode(String),
    #[error("domain knowledge is self-contradictory")]
    HardInconsistent,
    #[error("{0} soft constraints in conflict, max {MAX_SOFT}")]
    ScaleBound(usize),
    #[error(transparent)]
    Recipe(#[from] RecipeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Most soft constraints the revision search will branch over.
pub const MAX_SOFT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    DomainHard,
    RecipeSoft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Payload {
    /// Cell from the first id to the second.
    Allen(Relation),
    /// Window on `second − first`.
    Metric(BoundWindow),
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Allen(r) => write!(f, "{r}"),
            Payload::Metric(w) => write!(f, "{w}"),
        }
    }
}

/// A constraint with a stable id: `allen:a|b` or `metric:p|q`, ids in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedConstraint {
    pub id: String,
    pub first: String,
    pub second: String,
    pub payload: Payload,
    pub provenance: Provenance,
}

impl TaggedConstraint {
    pub fn allen(a: &str, b: &str, r: Relation, provenance: Provenance) -> Self {
        let (first, second, r) = if a <= b { (a, b, r) } else { (b, a, r.converse()) };
        TaggedConstraint {
            id: format!("allen:{first}|{second}"),
            first: first.to_string(),
            second: second.to_string(),
            payload: Payload::Allen(r),
            provenance,
        }
    }

    pub fn metric(from: &str, to: &str, w: BoundWindow, provenance: Provenance) -> Self {
        let (first, second, w) = if from <= to { (from, to, w) } else { (to, from, w.reversed()) };
        TaggedConstraint {
            id: format!("metric:{first}|{second}"),
            first: first.to_string(),
            second: second.to_string(),
            payload: Payload::Metric(w),
            provenance,
        }
    }

    fn apply(&self, net: &mut HybridNetwork) -> Result<(), MetricError> {
        match self.payload {
            Payload::Allen(r) => net.constrain_allen(&self.first, &self.second, r).map(|_| ()),
            Payload::Metric(w) => net.constrain_metric(&self.first, &self.second, w),
        }
    }
}

impl fmt::Display for TaggedConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.id, self.payload)
    }
}

/// Every asserted constraint of a network, tagged.
pub fn tag_constraints(h: &HybridNetwork, provenance: Provenance) -> Vec<TaggedConstraint> {
    let q = h.qcn();
    let mut out: Vec<TaggedConstraint> = q
        .pairs()
        .filter(|&(i, j)| !q.get(i, j).is_full())
        .map(|(i, j)| TaggedConstraint::allen(&q.names()[i], &q.names()[j], q.get(i, j), provenance))
        .collect();
    let pts = h.stp().points();
    out.extend(
        h.stp()
            .constraints()
            .map(|(i, j, w)| TaggedConstraint::metric(&pts[i].id, &pts[j].id, w, provenance)),
    );
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Drops intervals (and their endpoints) or anonymous points.
pub fn remove_entities(h: &HybridNetwork, ids: &[&str]) -> Result<HybridNetwork, AdaptError> {
    for &id in ids {
        if h.qcn().index_of(id).is_none() && h.stp().index_of(id).is_none() {
            return Err(AdaptError::UnknownId(id.to_string()));
        }
    }
    Ok(h.remove(ids)?)
}

/// A new node contributed by domain knowledge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnowledgeNode {
    pub id: String,
    /// Instruction text, empty for states and timers.
    pub text: String,
    pub is_action: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DomainKnowledge {
    pub name: String,
    /// In declaration order.
    pub nodes: Vec<KnowledgeNode>,
    pub constraints: Vec<TaggedConstraint>,
    pub anchors: Vec<String>,
    pub removes: Vec<String>,
}

impl DomainKnowledge {
    /// Compiles a knowledge file with only its explicit constraints: no text
    /// order, no preliminary rule.
    pub fn from_doc(doc: &KnowledgeDoc) -> Result<Self, AdaptError> {
        Self::from_doc_with(doc, &EncodeOptions::default())
    }

    pub fn from_doc_with(doc: &KnowledgeDoc, opts: &EncodeOptions) -> Result<Self, AdaptError> {
        let r = &doc.recipe;
        r.validate(&doc.anchors)?;
        let mut net = HybridNetwork::new();
        let mut nodes = Vec::new();
        for a in &r.actions {
            nodes.push(KnowledgeNode {
                id: a.id.clone(),
                text: a.text.clone(),
                is_action: true,
            });
        }
        for id in r.states.iter().map(|s| &s.id).chain(r.timers.iter().map(|t| &t.id)) {
            nodes.push(KnowledgeNode {
                id: id.clone(),
                text: String::new(),
                is_action: false,
            });
        }
        for id in nodes.iter().map(|n| n.id.as_str()).chain(doc.anchors.iter().map(String::as_str)) {
            net.add_interval(id)?;
        }
        let net = encode_into(r, &BTreeSet::new(), opts, EncodeMode::Knowledge, net)?;
        Ok(DomainKnowledge {
            name: doc.name.clone(),
            nodes,
            constraints: tag_constraints(&net, Provenance::DomainHard),
            anchors: doc.anchors.clone(),
            removes: doc.removes.clone(),
        })
    }
}

/// Recipe network plus knowledge, constraints split by provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedNetwork {
    /// All nodes, no constraints.
    skeleton: HybridNetwork,
    pub hard: Vec<TaggedConstraint>,
    pub soft: Vec<TaggedConstraint>,
    pub injected: Vec<KnowledgeNode>,
}

impl TaggedNetwork {
    /// Every constraint of `h` as soft; nothing injected.
    pub fn from_recipe(h: &HybridNetwork) -> Self {
        let mut skeleton = HybridNetwork::new();
        for id in h.intervals() {
            skeleton.add_interval(id).expect("ids from a valid network");
        }
        for p in h.stp().points() {
            if p.role == PointRole::Anonymous {
                skeleton.add_point(&p.id).expect("ids from a valid network");
            }
        }
        TaggedNetwork {
            skeleton,
            hard: Vec::new(),
            soft: tag_constraints(h, Provenance::RecipeSoft),
            injected: Vec::new(),
        }
    }

    pub fn intervals(&self) -> &[String] {
        self.skeleton.intervals()
    }

    /// Hard constraints plus the soft ones whose index is in `keep`.
    pub fn build(&self, keep: impl IntoIterator<Item = usize>) -> HybridNetwork {
        let mut net = self.skeleton.clone();
        for c in self.hard.iter().chain(keep.into_iter().map(|k| &self.soft[k])) {
            c.apply(&mut net).expect("constraint ids resolve in the skeleton");
        }
        net
    }
}

/// Adds `k`'s nodes and hard constraints to `h`, whose constraints become
/// soft.
pub fn inject(h: &HybridNetwork, k: &DomainKnowledge) -> Result<TaggedNetwork, AdaptError> {
    for a in &k.anchors {
        if h.qcn().index_of(a).is_none() {
            return Err(AdaptError::UnresolvedAnchor(a.clone()));
        }
    }
    let mut t = TaggedNetwork::from_recipe(h);
    for n in &k.nodes {
        if t.skeleton.qcn().index_of(&n.id).is_some() {
            return Err(AdaptError::DuplicateNode(n.id.clone()));
        }
        t.skeleton.add_interval(&n.id)?;
    }
    t.hard = k.constraints.clone();
    t.injected = k.nodes.clone();
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevisionResult {
    /// Hard constraints plus retained soft ones.
    pub network: HybridNetwork,
    pub hard: Vec<TaggedConstraint>,
    pub retained: Vec<TaggedConstraint>,
    pub relaxed: Vec<TaggedConstraint>,
    /// An atomic scenario of `network`.
    pub witness: ClosedHybrid,
    pub injected: Vec<KnowledgeNode>,
}

impl RevisionResult {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut section = |title: &str, cs: &[TaggedConstraint]| {
            out.push_str(&format!("{title} {}\n", cs.len()));
            for c in cs {
                out.push_str(&format!("  {c}\n"));
            }
        };
        section("hard", &self.hard);
        section("retained", &self.retained);
        section("relaxed", &self.relaxed);
        out
    }
}

struct Search<'a> {
    t: &'a TaggedNetwork,
    best: Option<(Vec<usize>, ClosedHybrid)>,
}

impl Search<'_> {
    fn run(&mut self, k: usize, kept: &mut Vec<usize>) {
        let n = self.t.soft.len();
        let best_len = self.best.as_ref().map_or(0, |(b, _)| b.len());
        if self.best.is_some() && kept.len() + (n - k) <= best_len {
            return;
        }
        if k == n {
            if let Some(w) = self.t.build(kept.iter().copied()).atomic_scenario() {
                self.best = Some((kept.clone(), w));
            }
            return;
        }
        kept.push(k);
        if matches!(self.t.build(kept.iter().copied()).close(), HybridClosure::Consistent(_)) {
            self.run(k + 1, kept);
        }
        kept.pop();
        self.run(k + 1, kept);
    }
}

/// Keeps a maximum-cardinality subset of soft constraints consistent with
/// the hard ones. Ties go to the subset retaining lexicographically smaller
/// ids: soft constraints are sorted by id and the search tries inclusion
/// first, so the first maximum found wins.
pub fn revise(t: &TaggedNetwork) -> Result<RevisionResult, AdaptError> {
    let mut t = t.clone();
    t.soft.sort_by(|a, b| a.id.cmp(&b.id));
    if t.build([]).atomic_scenario().is_none() {
        return Err(AdaptError::HardInconsistent);
    }
    let all: Vec<usize> = (0..t.soft.len()).collect();
    let (kept, witness) = match t.build(all.iter().copied()).atomic_scenario() {
        Some(w) => (all, w),
        None => {
            if t.soft.len() > MAX_SOFT {
                return Err(AdaptError::ScaleBound(t.soft.len()));
            }
            let mut s = Search { t: &t, best: None };
            s.run(0, &mut Vec::new());
            s.best.expect("the empty subset is consistent")
        }
    };
    let keep: BTreeSet<usize> = kept.iter().copied().collect();
    let (retained, relaxed) = t
        .soft
        .iter()
        .enumerate()
        .fold((Vec::new(), Vec::new()), |(mut r, mut x), (k, c)| {
            if keep.contains(&k) {
                r.push(c.clone());
            } else {
                x.push(c.clone());
            }
            (r, x)
        });
    Ok(RevisionResult {
        network: t.build(kept),
        hard: t.hard.clone(),
        retained,
        relaxed,
        witness,
        injected: t.injected.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EditOp {
    Delete,
    InsertAfter(String),
    FlagReview(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edit {
    pub span: Span,
    pub op: EditOp,
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.op {
            EditOp::Delete => write!(f, "{} delete", self.span),
            EditOp::InsertAfter(t) => write!(f, "{} insert-after {t:?}", self.span),
            EditOp::FlagReview(c) => write!(f, "{} flag-review {c}", self.span),
        }
    }
}

/// Interval a node id belongs to (point ids map to their interval).
fn owner(r: &RevisionResult, id: &str) -> Option<String> {
    if r.network.qcn().index_of(id).is_some() {
        return Some(id.to_string());
    }
    let p = r.network.stp().index_of(id)?;
    match &r.network.stp().points()[p].role {
        PointRole::Start(i) | PointRole::End(i) => Some(i.clone()),
        PointRole::Anonymous => None,
    }
}

/// Text edits mirroring a revision: delete the lines of removed recipe
/// nodes, insert knowledge instructions where they fall in the step order,
/// and flag the spans of relaxed constraints.
pub fn adapt_text_edits(r: &RevisionResult, source: &Recipe) -> Vec<Edit> {
    let mut edits = Vec::new();
    let present: BTreeSet<&str> = r.network.intervals().iter().map(String::as_str).collect();

    let mut deleted = BTreeSet::new();
    for a in source.actions.iter().filter(|a| !present.contains(a.id.as_str())) {
        if deleted.insert(a.span) {
            edits.push(Edit {
                span: a.span,
                op: EditOp::Delete,
            });
        }
    }

    let closed = r.network.close();
    let closed = closed.closed();
    let precedes = |a: &str, b: &str| {
        closed.is_some_and(|c| {
            c.relation(a, b).is_ok_and(|rel| {
                !rel.is_empty() && rel.is_subset(Relation::of(&[BaseRelation::Before, BaseRelation::Meets]))
            })
        })
    };
    let kept: Vec<&crate::recipe::ActionNode> = source
        .actions
        .iter()
        .filter(|a| present.contains(a.id.as_str()) && a.branch.is_none())
        .collect();
    let steps: Vec<&&crate::recipe::ActionNode> = kept.iter().filter(|a| a.kind == ActionKind::Step).collect();
    let mut inserts: Vec<(Span, Vec<&str>)> = Vec::new();
    for n in r.injected.iter().filter(|n| n.is_action) {
        let at = match steps.iter().position(|s| precedes(&n.id, &s.id)) {
            Some(0) => kept.iter().rfind(|a| a.kind == ActionKind::Preliminary).map(|a| a.span),
            Some(k) => Some(steps[k - 1].span),
            None => steps.last().map(|s| s.span),
        }
        .unwrap_or_default();
        match inserts.iter_mut().find(|(s, _)| *s == at) {
            Some((_, texts)) => texts.push(&n.text),
            None => inserts.push((at, vec![&n.text])),
        }
    }
    for (span, texts) in inserts {
        edits.push(Edit {
            span,
            op: EditOp::InsertAfter(texts.join(" ")),
        });
    }

    for c in &r.relaxed {
        let spans: Vec<Span> = [&c.first, &c.second]
            .into_iter()
            .filter_map(|id| owner(r, id))
            .filter_map(|id| source.span_of(&id))
            .collect();
        let span = match (spans.iter().map(|s| s.start).min(), spans.iter().map(|s| s.end).max()) {
            (Some(s), Some(e)) => Span::new(s, e),
            _ => Span::default(),
        };
        edits.push(Edit {
            span,
            op: EditOp::FlagReview(c.to_string()),
        });
    }

    edits.sort_by(|a, b| {
        let rank = |op: &EditOp| match op {
            EditOp::Delete => 0,
            EditOp::InsertAfter(_) => 1,
            EditOp::FlagReview(_) => 2,
        };
        (a.span, rank(&a.op)).cmp(&(b.span, rank(&b.op)))
    });
    edits
}

pub fn edits_to_text(edits: &[Edit]) -> String {
    edits.iter().map(|e| format!("{e}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use BaseRelation::*;

    fn net(ids: &[&str]) -> HybridNetwork {
        let mut h = HybridNetwork::new();
        for id in ids {
            h.add_interval(id).unwrap();
        }
        h
    }

    #[test]
    fn ids_are_oriented() {
        let c = TaggedConstraint::allen("y", "x", Relation::atom(Before), Provenance::RecipeSoft);
        assert_eq!(c.id, "allen:x|y");
        assert_eq!(c.payload, Payload::Allen(Relation::atom(After)));
        let m = TaggedConstraint::metric("y-", "x-", BoundWindow::closed(1, 2).unwrap(), Provenance::DomainHard);
        assert_eq!(m.id, "metric:x-|y-");
        assert_eq!(m.payload, Payload::Metric(BoundWindow::closed(-2, -1).unwrap()));
    }

    #[test]
    fn remove_nothing_and_everything() {
        let mut h = net(&["a", "b"]);
        h.constrain_allen("a", "b", Relation::atom(Before)).unwrap();
        assert_eq!(remove_entities(&h, &[]).unwrap(), h);
        let empty = remove_entities(&h, &["a", "b"]).unwrap();
        assert!(empty.intervals().is_empty());
        assert!(empty.is_consistent());
        assert_eq!(remove_entities(&h, &["zz"]), Err(AdaptError::UnknownId("zz".into())));
    }

    #[test]
    fn single_conflict_relaxes_the_soft_side() {
        let mut h = net(&["x", "y"]);
        h.constrain_allen("x", "y", Relation::atom(After)).unwrap();
        let mut t = TaggedNetwork::from_recipe(&h);
        t.hard.push(TaggedConstraint::allen("x", "y", Relation::atom(Before), Provenance::DomainHard));
        let r = revise(&t).unwrap();
        assert!(r.retained.is_empty());
        assert_eq!(r.relaxed.iter().map(|c| c.id.as_str()).collect::<Vec<_>>(), ["allen:x|y"]);
        assert_eq!(r.network.qcn().relation("x", "y").unwrap(), Relation::atom(Before));
    }

    #[test]
    fn empty_knowledge_keeps_everything_soft() {
        let mut h = net(&["a", "b"]);
        h.constrain_allen("a", "b", Relation::atom(Meets)).unwrap();
        let t = inject(&h, &DomainKnowledge::default()).unwrap();
        assert!(t.hard.is_empty());
        assert_eq!(t.soft.len(), 1);
        let r = revise(&t).unwrap();
        assert!(r.relaxed.is_empty());
        assert_eq!(r.network.qcn(), h.qcn());
    }

    #[test]
    fn unresolved_anchor() {
        let k = DomainKnowledge {
            anchors: vec!["gone".into()],
            ..Default::default()
        };
        assert_eq!(
            inject(&net(&["a"]), &k).unwrap_err(),
            AdaptError::UnresolvedAnchor("gone".into())
        );
    }

    #[test]
    fn hard_contradiction_is_an_error() {
        let mut t = TaggedNetwork::from_recipe(&net(&["a", "b", "c"]));
        for (x, y) in [("a", "b"), ("b", "c"), ("c", "a")] {
            t.hard.push(TaggedConstraint::allen(x, y, Relation::atom(Before), Provenance::DomainHard));
        }
        assert_eq!(revise(&t).unwrap_err(), AdaptError::HardInconsistent);
    }

    #[test]
    fn identity_revision_has_no_edits() {
        let r = crate::annotation::parse_recipe_dsl("recipe \"r\"\nstep a \"A\"\nstep b \"B\"\n").unwrap();
        let h = crate::recipe::encode_recipe(&r).unwrap().remove(0).network;
        let rev = revise(&inject(&h, &DomainKnowledge::default()).unwrap()).unwrap();
        assert!(adapt_text_edits(&rev, &r).is_empty());
    }
}
