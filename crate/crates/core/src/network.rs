//! Constraint networks over a relation algebra: converse-symmetric matrices
//! with path-consistency closure and atomic scenario search.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("unknown interval `{0}`")]
    UnknownInterval(String),
    #[error("duplicate interval `{0}`")]
    DuplicateInterval(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// What a network needs from its relations.
pub trait RelationAlgebra: Copy + Eq + fmt::Display + fmt::Debug {
    fn empty() -> Self;
    /// The relation carrying no information.
    fn full() -> Self;
    /// Label of the diagonal.
    fn identity() -> Self;
    fn converse(self) -> Self;
    fn compose(self, other: Self) -> Self;
    fn intersect(self, other: Self) -> Self;
    /// Number of atoms.
    fn len(self) -> usize;
    /// Singleton relations, in canonical atom order.
    fn singletons(self) -> Vec<Self>;

    fn is_empty(self) -> bool {
        self.len() == 0
    }

    fn is_full(self) -> bool {
        self == Self::full()
    }
}

/// Named intervals plus a converse-symmetric matrix of relations. The
/// diagonal always holds the identity.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Network<R> {
    names: Vec<String>,
    cells: Vec<R>,
}

/// Outcome of path-consistency closure.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Closure<R> {
    Consistent(Network<R>),
    /// Some cell became empty. The network holds the state at detection.
    Inconsistent(Network<R>),
}

impl<R> Closure<R> {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Closure::Consistent(_))
    }

    pub fn network(&self) -> &Network<R> {
        match self {
            Closure::Consistent(n) | Closure::Inconsistent(n) => n,
        }
    }

    pub fn into_network(self) -> Network<R> {
        match self {
            Closure::Consistent(n) | Closure::Inconsistent(n) => n,
        }
    }
}

impl<R: RelationAlgebra> Default for Network<R> {
    fn default() -> Self {
        Network {
            names: Vec::new(),
            cells: Vec::new(),
        }
    }
}

impl<R: RelationAlgebra> Network<R> {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, NetworkError> {
        let mut net = Self::default();
        for n in names {
            net.add_interval(n)?;
        }
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, NetworkError> {
        self.index_of(name)
            .ok_or_else(|| NetworkError::UnknownInterval(name.to_string()))
    }

    /// Appends an interval, unconstrained against all others.
    pub fn add_interval(&mut self, name: impl Into<String>) -> Result<usize, NetworkError> {
        let name = name.into();
        if self.index_of(&name).is_some() {
            return Err(NetworkError::DuplicateInterval(name));
        }
        let old = self.names.len();
        let n = old + 1;
        let mut cells = vec![R::full(); n * n];
        for i in 0..old {
            for j in 0..old {
                cells[i * n + j] = self.cells[i * old + j];
            }
        }
        cells[old * n + old] = R::identity();
        self.cells = cells;
        self.names.push(name);
        Ok(old)
    }

    /// Drops the named intervals and every cell mentioning them.
    pub fn remove_intervals(&self, drop: &[&str]) -> Result<Self, NetworkError> {
        for d in drop {
            self.require(d)?;
        }
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !drop.contains(&self.names[i].as_str()))
            .collect();
        let mut cells = Vec::with_capacity(keep.len() * keep.len());
        for &i in &keep {
            for &j in &keep {
                cells.push(self.get(i, j));
            }
        }
        Ok(Network {
            names: keep.iter().map(|&i| self.names[i].clone()).collect(),
            cells,
        })
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.cells[i * self.len() + j]
    }

    pub fn relation(&self, a: &str, b: &str) -> Result<R, NetworkError> {
        Ok(self.get(self.require(a)?, self.require(b)?))
    }

    /// Overwrites cell `(i, j)` and its converse.
    pub fn set(&mut self, i: usize, j: usize, r: R) {
        let n = self.len();
        self.cells[i * n + j] = r;
        self.cells[j * n + i] = r.converse();
    }

    /// Intersects cell `(i, j)` with `r`. Returns the new cell.
    pub fn constrain(&mut self, i: usize, j: usize, r: R) -> R {
        let cell = self.get(i, j).intersect(r);
        self.set(i, j, cell);
        cell
    }

    pub fn constrain_named(&mut self, a: &str, b: &str, r: R) -> Result<R, NetworkError> {
        let (i, j) = (self.require(a)?, self.require(b)?);
        Ok(self.constrain(i, j, r))
    }

    pub fn has_empty_cell(&self) -> bool {
        self.cells.iter().any(|c| c.is_empty())
    }

    /// True when every cell holds exactly one atom.
    pub fn is_atomic(&self) -> bool {
        self.cells.iter().all(|c| c.len() == 1)
    }

    /// Upper-triangle pairs `(i, j)`, `i < j`, in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    /// Path-consistency closure: the largest fixpoint of
    /// `C[i][j] <- C[i][j] ∩ C[i][k] ∘ C[k][j]` over all triples.
    pub fn close(&self) -> Closure<R> {
        let mut net = self.clone();
        if net.has_empty_cell() {
            return Closure::Inconsistent(net);
        }
        let n = net.len();
        let mut queued = vec![false; n * n];
        let mut queue = VecDeque::new();
        for (i, j) in net.pairs() {
            queue.push_back((i, j));
            queued[i * n + j] = true;
        }
        while let Some((i, j)) = queue.pop_front() {
            queued[i * n + j] = false;
            let rij = net.get(i, j);
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                // C[i][k] through j, then C[k][j] through i.
                for (a, b) in [(i, k), (k, j)] {
                    let via = if a == i {
                        rij.compose(net.get(j, k))
                    } else {
                        net.get(k, i).compose(rij)
                    };
                    let old = net.get(a, b);
                    let new = old.intersect(via);
                    if new == old {
                        continue;
                    }
                    net.set(a, b, new);
                    if new.is_empty() {
                        return Closure::Inconsistent(net);
                    }
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    if !queued[lo * n + hi] {
                        queued[lo * n + hi] = true;
                        queue.push_back((lo, hi));
                    }
                }
            }
        }
        Closure::Consistent(net)
    }

    /// Backtracking search for an atomic refinement that survives closure.
    /// Cells are split in row-major order and atoms tried in canonical
    /// order, so the returned scenario is deterministic.
    pub fn atomic_scenario(&self) -> Option<Self> {
        match self.close() {
            Closure::Consistent(n) => n.scenario_search(),
            Closure::Inconsistent(_) => None,
        }
    }

    pub fn is_atomic_consistent(&self) -> bool {
        self.atomic_scenario().is_some()
    }

    fn scenario_search(self) -> Option<Self> {
        let Some((i, j)) = self.pairs().find(|&(i, j)| self.get(i, j).len() > 1) else {
            return Some(self);
        };
        for atom in self.get(i, j).singletons() {
            let mut next = self.clone();
            next.set(i, j, atom);
            if let Closure::Consistent(closed) = next.close() {
                if let Some(s) = closed.scenario_search() {
                    return Some(s);
                }
            }
        }
        None
    }

    /// Text form: an `intervals` header listing sorted ids, then one line
    /// `<id_i> <id_j> <relation>` per non-tautological pair with
    /// `id_i < id_j`.
    pub fn to_text(&self) -> String {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.names[a].cmp(&self.names[b]));
        let mut out = String::from("intervals");
        for &i in &order {
            out.push(' ');
            out.push_str(&self.names[i]);
        }
        out.push('\n');
        for (x, &i) in order.iter().enumerate() {
            for &j in &order[x + 1..] {
                let r = self.get(i, j);
                if !r.is_full() {
                    out.push_str(&format!("{} {} {}\n", self.names[i], self.names[j], r));
                }
            }
        }
        out
    }
}

impl<R> Network<R>
where
    R: RelationAlgebra + FromStr,
    R::Err: fmt::Display,
{
    pub fn parse_text(text: &str) -> Result<Self, NetworkError> {
        let mut net: Option<Self> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| NetworkError::Parse {
                line: lineno + 1,
                message,
            };
            if let Some(rest) = line.strip_prefix("intervals") {
                if net.is_some() {
                    return Err(err("repeated `intervals` header".into()));
                }
                let mut ids: Vec<&str> = rest.split_whitespace().collect();
                ids.sort_unstable();
                net = Some(Self::new(ids).map_err(|e| err(e.to_string()))?);
                continue;
            }
            let net = net
                .as_mut()
                .ok_or_else(|| err("missing `intervals` header".into()))?;
            let mut parts = line.splitn(3, char::is_whitespace);
            let (Some(a), Some(b), Some(rel)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(err(format!("expected `<id> <id> <relation>`, got `{line}`")));
            };
            let rel: R = rel.parse().map_err(|e: R::Err| err(e.to_string()))?;
            net.constrain_named(a, b, rel)
                .map_err(|e| err(e.to_string()))?;
        }
        Ok(net.unwrap_or_default())
    }
}
