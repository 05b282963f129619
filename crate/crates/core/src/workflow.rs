//! Workflow export: precedence from closed networks, grouped into
//! sequences, and-bands of unordered actions, exclusive choices between
//! scenarios, and loops for repetition markers.
//!
//! `a` precedes `b` when the closed cell `C[a][b]` is a nonempty subset of
//! `{b, m}`. Actions unordered in both directions run in parallel.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::allen::{BaseRelation, Relation};
use crate::metric::ClosedHybrid;
use crate::recipe::{encode_recipe, Recipe, RecipeError, RepetitionMarker, RepetitionMode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorkflowError {
    #[error("precedence is cyclic through `{0}`")]
    Cyclic(String),
    #[error("scenario `{0}` is inconsistent")]
    Inconsistent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error(transparent)]
    Recipe(#[from] RecipeError),
}

/// Strict precedence among a set of actions, transitively closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Precedence {
    pub ids: Vec<String>,
    before: Vec<bool>,
}

impl Precedence {
    pub fn from_closed(closed: &ClosedHybrid, ids: &[String]) -> Result<Self, WorkflowError> {
        let order = Relation::of(&[BaseRelation::Before, BaseRelation::Meets]);
        let n = ids.len();
        let mut before = vec![false; n * n];
        for (i, a) in ids.iter().enumerate() {
            for (j, b) in ids.iter().enumerate() {
                if i != j {
                    let r = closed
                        .qcn
                        .relation(a, b)
                        .map_err(|_| WorkflowError::UnknownAction(a.clone()))?;
                    before[i * n + j] = !r.is_empty() && r.is_subset(order);
                }
            }
        }
        Self::from_matrix(ids.to_vec(), before)
    }

    /// Closes `before` transitively and rejects cycles.
    pub fn from_matrix(ids: Vec<String>, mut before: Vec<bool>) -> Result<Self, WorkflowError> {
        let n = ids.len();
        for k in 0..n {
            for i in 0..n {
                if before[i * n + k] {
                    for j in 0..n {
                        if before[k * n + j] {
                            before[i * n + j] = true;
                        }
                    }
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| before[i * n + i]) {
            return Err(WorkflowError::Cyclic(ids[i].clone()));
        }
        Ok(Precedence { ids, before })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn before(&self, i: usize, j: usize) -> bool {
        self.before[i * self.len() + j]
    }

    fn comparable(&self, i: usize, j: usize) -> bool {
        self.before(i, j) || self.before(j, i)
    }

    /// Edges of the transitive reduction, row-major.
    pub fn reduction(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.before(i, j) && !(0..n).any(|k| self.before(i, k) && self.before(k, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Structured form of one scenario, before it becomes a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Block {
    Act(String),
    Seq(Vec<Block>),
    Par(Vec<Block>),
    /// Not series-parallel: members and reduction edges.
    Dag(Vec<String>, Vec<(String, String)>),
    Loop(RepetitionMarker, Box<Block>),
    Xor(Vec<(String, Vec<Block>)>),
}

fn topo_order(p: &Precedence, set: &[usize]) -> Vec<usize> {
    let mut left: Vec<usize> = set.to_vec();
    let mut out = Vec::new();
    while !left.is_empty() {
        let pos = left
            .iter()
            .position(|&x| !left.iter().any(|&y| p.before(y, x)))
            .expect("precedence is acyclic");
        out.push(left.remove(pos));
    }
    out
}

fn decompose(p: &Precedence, set: &[usize]) -> Block {
    if let [only] = set {
        return Block::Act(p.ids[*only].clone());
    }
    let order = topo_order(p, set);
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut start = 0;
    for k in 1..order.len() {
        if order[..k].iter().all(|&a| order[k..].iter().all(|&b| p.before(a, b))) {
            blocks.push(order[start..k].to_vec());
            start = k;
        }
    }
    blocks.push(order[start..].to_vec());
    if blocks.len() > 1 {
        return Block::Seq(blocks.iter().map(|b| decompose(p, &sorted(b))).collect());
    }

    let mut comp: Vec<usize> = (0..set.len()).collect();
    for a in 0..set.len() {
        for b in 0..set.len() {
            if p.comparable(set[a], set[b]) && comp[a] != comp[b] {
                let (from, to) = (comp[b], comp[a]);
                comp.iter_mut().filter(|c| **c == from).for_each(|c| *c = to);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &c) in comp.iter().enumerate() {
        groups.entry(c).or_default().push(set[k]);
    }
    if groups.len() > 1 {
        let mut parts: Vec<Vec<usize>> = groups.into_values().map(|g| sorted(&g)).collect();
        parts.sort();
        return Block::Par(parts.iter().map(|g| decompose(p, g)).collect());
    }

    let members: BTreeSet<usize> = set.iter().copied().collect();
    let edges = p
        .reduction()
        .into_iter()
        .filter(|(a, b)| members.contains(a) && members.contains(b))
        .map(|(a, b)| (p.ids[a].clone(), p.ids[b].clone()))
        .collect();
    Block::Dag(set.iter().map(|&k| p.ids[k].clone()).collect(), edges)
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

fn wrap_loops(block: Block, markers: &[RepetitionMarker]) -> Block {
    match block {
        Block::Act(id) => {
            let mut mine: Vec<&RepetitionMarker> = markers.iter().filter(|m| m.target == id).collect();
            mine.sort();
            mine.into_iter()
                .fold(Block::Act(id), |b, m| Block::Loop(m.clone(), Box::new(b)))
        }
        Block::Seq(bs) => Block::Seq(bs.into_iter().map(|b| wrap_loops(b, markers)).collect()),
        Block::Par(bs) => Block::Par(bs.into_iter().map(|b| wrap_loops(b, markers)).collect()),
        other => other,
    }
}

fn into_seq(b: Block) -> Vec<Block> {
    match b {
        Block::Seq(bs) => bs,
        other => vec![other],
    }
}

/// Several scenarios under one exclusive choice, common prefix and suffix
/// hoisted out.
fn merge(mut scenarios: Vec<(String, Vec<Block>)>) -> Vec<Block> {
    if scenarios.len() == 1 {
        return scenarios.remove(0).1;
    }
    let mut prefix = Vec::new();
    while scenarios.iter().all(|(_, s)| !s.is_empty() && s[0] == scenarios[0].1[0]) {
        let b = scenarios[0].1[0].clone();
        for (_, s) in &mut scenarios {
            s.remove(0);
        }
        prefix.push(b);
    }
    let mut suffix = Vec::new();
    while scenarios.iter().all(|(_, s)| !s.is_empty() && s.last() == scenarios[0].1.last()) {
        let b = scenarios[0].1.last().cloned().expect("nonempty");
        for (_, s) in &mut scenarios {
            s.pop();
        }
        suffix.insert(0, b);
    }
    prefix.push(Block::Xor(scenarios));
    prefix.extend(suffix);
    prefix
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeKind {
    Start,
    End,
    Action { label: String },
    AndSplit,
    AndJoin,
    XorSplit,
    XorJoin,
    /// Repeats its body; `body` lists the member node ids.
    Loop { marker: String, body: Vec<String> },
    NoOp,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WorkflowNode {
    pub id: String,
    pub kind: NodeKind,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WorkflowEdge {
    pub from: String,
    pub to: String,
    pub label: Option<String>,
    /// Returns into a loop node.
    pub back: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WorkflowGraph {
    pub nodes: Vec<WorkflowNode>,
    pub edges: Vec<WorkflowEdge>,
}

impl WorkflowGraph {
    pub fn node(&self, id: &str) -> Option<&WorkflowNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Forward successors, sorted.
    pub fn successors(&self, id: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .edges
            .iter()
            .filter(|e| e.from == id && !e.back)
            .map(|e| e.to.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn predecessors(&self, id: &str) -> Vec<&str> {
        let mut out: Vec<&str> = self
            .edges
            .iter()
            .filter(|e| e.to == id && !e.back)
            .map(|e| e.from.as_str())
            .collect();
        out.sort_unstable();
        out
    }

    pub fn count(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }
}

struct Emitter<'a> {
    g: WorkflowGraph,
    labels: &'a BTreeMap<String, String>,
    counters: BTreeMap<&'static str, usize>,
    /// Scenario label while inside an exclusive branch.
    scope: Option<String>,
}

impl Emitter<'_> {
    fn fresh(&mut self, prefix: &'static str, kind: NodeKind) -> String {
        let n = self.counters.entry(prefix).or_insert(0);
        *n += 1;
        let id = format!("{prefix}_{n}");
        self.g.nodes.push(WorkflowNode { id: id.clone(), kind });
        id
    }

    fn edge(&mut self, from: &str, to: &str, label: Option<String>, back: bool) {
        self.g.edges.push(WorkflowEdge {
            from: from.to_string(),
            to: to.to_string(),
            label,
            back,
        });
    }

    /// Node id for an action; copies inside exclusive branches get the
    /// scenario label as a suffix.
    fn scoped(&self, id: &str) -> String {
        match &self.scope {
            Some(s) => format!("{id}@{s}"),
            None => id.to_string(),
        }
    }

    fn action(&mut self, id: &str) -> String {
        let node = self.scoped(id);
        if self.g.node(&node).is_none() {
            let label = self.labels.get(id).cloned().unwrap_or_else(|| id.to_string());
            self.g.nodes.push(WorkflowNode {
                id: node.clone(),
                kind: NodeKind::Action { label },
            });
        }
        node
    }

    fn seq(&mut self, bs: &[Block]) -> (String, String) {
        if bs.is_empty() {
            let id = self.fresh("noop", NodeKind::NoOp);
            return (id.clone(), id);
        }
        let (entry, mut exit) = self.emit(&bs[0]);
        for b in &bs[1..] {
            let (i, o) = self.emit(b);
            self.edge(&exit, &i, None, false);
            exit = o;
        }
        (entry, exit)
    }

    fn emit(&mut self, b: &Block) -> (String, String) {
        match b {
            Block::Act(id) => {
                let node = self.action(id);
                (node.clone(), node)
            }
            Block::Seq(bs) => self.seq(bs),
            Block::Par(bs) => {
                let split = self.fresh("and_split", NodeKind::AndSplit);
                let join = self.fresh("and_join", NodeKind::AndJoin);
                for x in bs {
                    let (i, o) = self.emit(x);
                    self.edge(&split, &i, None, false);
                    self.edge(&o, &join, None, false);
                }
                (split, join)
            }
            Block::Dag(ids, edges) => {
                let split = self.fresh("and_split", NodeKind::AndSplit);
                let join = self.fresh("and_join", NodeKind::AndJoin);
                for id in ids {
                    let node = self.action(id);
                    if !edges.iter().any(|(_, to)| to == id) {
                        self.edge(&split, &node, None, false);
                    }
                    if !edges.iter().any(|(from, _)| from == id) {
                        self.edge(&node, &join, None, false);
                    }
                }
                for (a, c) in edges {
                    let (a, c) = (self.scoped(a), self.scoped(c));
                    self.edge(&a, &c, None, false);
                }
                (split, join)
            }
            Block::Xor(branches) => {
                let split = self.fresh("xor_split", NodeKind::XorSplit);
                let join = self.fresh("xor_join", NodeKind::XorJoin);
                for (label, bs) in branches {
                    let outer = self.scope.replace(label.clone());
                    let (i, o) = self.seq(bs);
                    self.scope = outer;
                    self.edge(&split, &i, Some(label.clone()), false);
                    self.edge(&o, &join, None, false);
                }
                (split, join)
            }
            Block::Loop(marker, inner) => {
                let (i, o) = self.emit(inner);
                let (text, with_noop) = describe(marker);
                let mut body = vec![i.clone()];
                let id = self.scoped(&format!("loop_{}", marker.target));
                let id = if self.g.node(&id).is_some() {
                    self.fresh("loop", NodeKind::NoOp)
                } else {
                    id
                };
                if with_noop {
                    let noop = self.fresh("noop", NodeKind::NoOp);
                    self.edge(&id, &noop, None, false);
                    self.edge(&noop, &id, Some("repeat".into()), true);
                    body.push(noop);
                }
                self.edge(&id, &i, None, false);
                self.edge(&o, &id, Some("repeat".into()), true);
                let kind = NodeKind::Loop { marker: text, body };
                match self.g.nodes.iter_mut().find(|n| n.id == id) {
                    Some(n) => n.kind = kind,
                    None => self.g.nodes.push(WorkflowNode { id: id.clone(), kind }),
                }
                (id.clone(), id)
            }
        }
    }
}

/// Marker text and whether the body pairs the action with a no-op.
fn describe(m: &RepetitionMarker) -> (String, bool) {
    match &m.mode {
        RepetitionMode::SporadicIn(c) => (format!("sporadic in {c}"), true),
        RepetitionMode::AlternatesWith(c) => (format!("alternates with {c}"), true),
        RepetitionMode::Times(n) => (format!("{n} times"), false),
        RepetitionMode::Until(s) => (format!("until {s}"), false),
    }
}

/// One closed scenario with the actions and markers it covers.
#[derive(Clone, Copy, Debug)]
pub struct ScenarioView<'a> {
    pub label: &'a str,
    pub closed: &'a ClosedHybrid,
    pub actions: &'a [String],
    pub markers: &'a [RepetitionMarker],
}

/// Builds the workflow for a set of scenarios. `labels` maps action ids to
/// display text.
pub fn to_workflow(
    scenarios: &[ScenarioView<'_>],
    labels: &BTreeMap<String, String>,
) -> Result<WorkflowGraph, WorkflowError> {
    let mut blocks = Vec::new();
    for s in scenarios {
        let p = Precedence::from_closed(s.closed, s.actions)?;
        let seq = if p.is_empty() {
            Vec::new()
        } else {
            let all: Vec<usize> = (0..p.len()).collect();
            into_seq(wrap_loops(decompose(&p, &all), s.markers))
        };
        blocks.push((s.label.to_string(), seq));
    }
    let body = if blocks.is_empty() { Vec::new() } else { merge(blocks) };

    let mut e = Emitter {
        g: WorkflowGraph::default(),
        labels,
        counters: BTreeMap::new(),
        scope: None,
    };
    e.g.nodes.push(WorkflowNode {
        id: "start".into(),
        kind: NodeKind::Start,
    });
    e.g.nodes.push(WorkflowNode {
        id: "end".into(),
        kind: NodeKind::End,
    });
    if body.is_empty() {
        e.edge("start", "end", None, false);
    } else {
        let (i, o) = e.seq(&body);
        e.edge("start", &i, None, false);
        e.edge(&o, "end", None, false);
    }
    Ok(e.g)
}

/// Encodes, closes and exports every scenario of a recipe.
pub fn recipe_workflow(r: &Recipe) -> Result<WorkflowGraph, WorkflowError> {
    let scenarios = encode_recipe(r)?;
    let mut closed = Vec::new();
    for s in &scenarios {
        let c = s.network.close();
        let c = c
            .closed()
            .cloned()
            .ok_or_else(|| WorkflowError::Inconsistent(s.label.clone()))?;
        closed.push(c);
    }
    let views: Vec<ScenarioView<'_>> = scenarios
        .iter()
        .zip(&closed)
        .map(|(s, c)| ScenarioView {
            label: &s.label,
            closed: c,
            actions: &s.actions,
            markers: &s.markers,
        })
        .collect();
    let labels = r.actions.iter().map(|a| (a.id.clone(), a.text.clone())).collect();
    to_workflow(&views, &labels)
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_attrs(n: &WorkflowNode) -> String {
    match &n.kind {
        NodeKind::Start => "shape=circle, label=\"start\"".into(),
        NodeKind::End => "shape=doublecircle, label=\"end\"".into(),
        NodeKind::Action { label } => format!("shape=box, label={}", quote(label)),
        NodeKind::AndSplit | NodeKind::AndJoin => {
            "shape=box, style=filled, fillcolor=black, height=0.08, width=1.5, label=\"\"".into()
        }
        NodeKind::XorSplit | NodeKind::XorJoin => "shape=diamond, label=\"X\"".into(),
        NodeKind::Loop { marker, .. } => format!("shape=hexagon, label={}", quote(&format!("loop: {marker}"))),
        NodeKind::NoOp => "shape=box, style=dashed, label=\"no-op\"".into(),
    }
}

/// Graphviz text. Nodes sorted by id; loop bodies grouped in a cluster with
/// their loop node; one edge per line, sorted.
pub fn emit_dot(w: &WorkflowGraph) -> String {
    let mut nodes: Vec<&WorkflowNode> = w.nodes.iter().collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let in_loop: BTreeSet<&str> = nodes
        .iter()
        .filter_map(|n| match &n.kind {
            NodeKind::Loop { body, .. } => Some(body.iter().map(String::as_str).chain([n.id.as_str()])),
            _ => None,
        })
        .flatten()
        .collect();

    let mut out = String::from("digraph workflow {\n  rankdir=TB;\n");
    for n in nodes.iter().filter(|n| !in_loop.contains(n.id.as_str())) {
        let _ = writeln!(out, "  {} [{}];", quote(&n.id), node_attrs(n));
    }
    for n in &nodes {
        if let NodeKind::Loop { body, .. } = &n.kind {
            let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{}", n.id)));
            let _ = writeln!(out, "    style=dashed;");
            let _ = writeln!(out, "    {} [{}];", quote(&n.id), node_attrs(n));
            let mut members: Vec<&str> = body.iter().map(String::as_str).collect();
            members.sort_unstable();
            for m in members {
                if let Some(x) = w.node(m) {
                    let _ = writeln!(out, "    {} [{}];", quote(m), node_attrs(x));
                }
            }
            out.push_str("  }\n");
        }
    }
    let mut edges: Vec<String> = w
        .edges
        .iter()
        .map(|e| {
            let mut attrs = Vec::new();
            if let Some(l) = &e.label {
                attrs.push(format!("label={}", quote(l)));
            }
            if e.back {
                attrs.push("style=dashed".into());
                attrs.push("constraint=false".into());
            }
            let attrs = if attrs.is_empty() {
                String::new()
            } else {
                format!(" [{}]", attrs.join(", "))
            };
            format!("  {} -> {}{};", quote(&e.from), quote(&e.to), attrs)
        })
        .collect();
    edges.sort();
    for e in edges {
        out.push_str(&e);
        out.push('\n');
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::HybridNetwork;

    fn closed(ids: &[&str], rels: &[(&str, BaseRelation, &str)]) -> ClosedHybrid {
        let mut h = HybridNetwork::new();
        for id in ids {
            h.add_interval(id).unwrap();
        }
        for (a, r, b) in rels {
            h.constrain_allen(a, b, Relation::atom(*r)).unwrap();
        }
        h.close().closed().unwrap().clone()
    }

    fn workflow(ids: &[&str], rels: &[(&str, BaseRelation, &str)], markers: &[RepetitionMarker]) -> WorkflowGraph {
        let c = closed(ids, rels);
        let actions: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        let view = ScenarioView {
            label: "base",
            closed: &c,
            actions: &actions,
            markers,
        };
        to_workflow(&[view], &BTreeMap::new()).unwrap()
    }

    #[test]
    fn empty_workflow() {
        let w = to_workflow(&[], &BTreeMap::new()).unwrap();
        assert_eq!(w.nodes.len(), 2);
        assert_eq!(w.successors("start"), ["end"]);
        let dot = emit_dot(&w);
        assert!(dot.contains("\"start\" -> \"end\";"));
    }

    #[test]
    fn single_action() {
        let w = workflow(&["a"], &[], &[]);
        assert_eq!(w.successors("start"), ["a"]);
        assert_eq!(w.successors("a"), ["end"]);
    }

    #[test]
    fn unordered_pair_becomes_a_band() {
        let w = workflow(&["a", "b", "c"], &[("a", BaseRelation::Before, "c"), ("b", BaseRelation::Meets, "c")], &[]);
        assert_eq!(w.count(|k| *k == NodeKind::AndSplit), 1);
        let mut band = w.successors("and_split_1");
        band.sort_unstable();
        assert_eq!(band, ["a", "b"]);
        assert_eq!(w.successors("and_join_1"), ["c"]);
    }

    #[test]
    fn n_shape_falls_back_to_dag() {
        use BaseRelation::Before;
        let w = workflow(
            &["a", "b", "c", "d"],
            &[("a", Before, "c"), ("b", Before, "c"), ("b", Before, "d")],
            &[],
        );
        assert!(w.edges.iter().any(|e| e.from == "b" && e.to == "d"));
        assert!(!w.edges.iter().any(|e| e.from == "a" && e.to == "d"));
    }

    #[test]
    fn loop_node_has_back_edges() {
        let m = RepetitionMarker {
            target: "stir".into(),
            mode: RepetitionMode::SporadicIn("simmer".into()),
        };
        let w = workflow(&["simmer", "stir"], &[("simmer", BaseRelation::Contains, "stir")], &[m]);
        let lp = w.node("loop_stir").unwrap();
        let NodeKind::Loop { body, .. } = &lp.kind else {
            panic!("{lp:?}");
        };
        assert_eq!(body.len(), 2);
        assert!(w.edges.iter().any(|e| e.back && e.from == "stir" && e.to == "loop_stir"));
        let dot = emit_dot(&w);
        assert!(dot.contains("subgraph \"cluster_loop_stir\""));
        assert_eq!(dot, emit_dot(&w));
    }

    #[test]
    fn reduction_drops_implied_edges() {
        let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mut m = vec![false; 9];
        m[1] = true;
        m[5] = true;
        let p = Precedence::from_matrix(ids, m).unwrap();
        assert!(p.before(0, 2));
        assert_eq!(p.reduction(), [(0, 1), (1, 2)]);
    }

    #[test]
    fn cycles_are_rejected() {
        let ids: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let m = vec![false, true, true, false];
        assert!(matches!(Precedence::from_matrix(ids, m), Err(WorkflowError::Cyclic(_))));
    }
}
