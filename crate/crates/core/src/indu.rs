//! INDU: Allen relations paired with a qualitative comparison of the two
//! intervals' durations.
//!
//! Only 25 of the 39 (atom, sign) pairs are meaningful: `d`, `s`, `f` force the
//! first interval to be shorter, their converses force it to be longer, `e`
//! forces equal durations, and the six remaining atoms admit any sign.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::allen::{AllenError, BaseRelation, Relation};
use crate::network::{Network, RelationAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InduError {
    #[error(transparent)]
    Allen(#[from] AllenError),
    #[error("unknown duration sign `{0}`")]
    UnknownSign(String),
    #[error("malformed INDU atom `{0}`: expected `allen^sign`")]
    MalformedAtom(String),
    #[error("invalid INDU atom `{0}`: duration sign contradicts the Allen relation")]
    InvalidAtom(String),
    #[error("malformed INDU relation `{0}`")]
    MalformedRelation(String),
}

/// Comparison of the first interval's duration with the second's.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum DurSign {
    Shorter = 0,
    Same,
    Longer,
}

impl DurSign {
    pub const ALL: [DurSign; 3] = [DurSign::Shorter, DurSign::Same, DurSign::Longer];

    pub fn converse(self) -> Self {
        match self {
            DurSign::Shorter => DurSign::Longer,
            DurSign::Same => DurSign::Same,
            DurSign::Longer => DurSign::Shorter,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            DurSign::Shorter => "<",
            DurSign::Same => "=",
            DurSign::Longer => ">",
        }
    }

    /// Sign of `dur(x) - dur(z)` given the signs for `(x, y)` and `(y, z)`.
    pub fn compose(self, other: Self) -> &'static [DurSign] {
        use DurSign::*;
        match (self, other) {
            (Same, Shorter) | (Shorter, Same) | (Shorter, Shorter) => &[Shorter],
            (Same, Longer) | (Longer, Same) | (Longer, Longer) => &[Longer],
            (Same, Same) => &[Same],
            (Shorter, Longer) | (Longer, Shorter) => &Self::ALL,
        }
    }

    /// The sign of `a` compared with `b`.
    pub fn of<T: Ord>(a: T, b: T) -> Self {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => DurSign::Shorter,
            std::cmp::Ordering::Equal => DurSign::Same,
            std::cmp::Ordering::Greater => DurSign::Longer,
        }
    }
}

impl FromStr for DurSign {
    type Err = InduError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "<" => Ok(DurSign::Shorter),
            "=" => Ok(DurSign::Same),
            ">" => Ok(DurSign::Longer),
            other => Err(InduError::UnknownSign(other.to_string())),
        }
    }
}

/// An Allen atom with a duration sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InduAtom {
    pub allen: BaseRelation,
    pub dur: DurSign,
}

impl InduAtom {
    /// Returns `None` for combinations no pair of intervals can realize.
    pub fn new(allen: BaseRelation, dur: DurSign) -> Option<Self> {
        let atom = InduAtom { allen, dur };
        atom.is_valid().then_some(atom)
    }

    pub fn is_valid(self) -> bool {
        use BaseRelation::*;
        match self.allen {
            During | Starts | Finishes => self.dur == DurSign::Shorter,
            Contains | StartedBy | FinishedBy => self.dur == DurSign::Longer,
            Equals => self.dur == DurSign::Same,
            _ => true,
        }
    }

    fn bit(self) -> u64 {
        1 << (self.allen.index() * 3 + self.dur as usize)
    }

    pub fn converse(self) -> Self {
        InduAtom {
            allen: self.allen.converse(),
            dur: self.dur.converse(),
        }
    }

    /// The atom holding between two realized intervals.
    pub fn of<T: Ord + Copy + std::ops::Sub<Output = T>>(x: (T, T), y: (T, T)) -> Self {
        InduAtom {
            allen: BaseRelation::of(x, y),
            dur: DurSign::of(x.1 - x.0, y.1 - y.0),
        }
    }
}

impl fmt::Display for InduAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.allen, self.dur.symbol())
    }
}

impl FromStr for InduAtom {
    type Err = InduError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (a, d) = s
            .split_once('^')
            .ok_or_else(|| InduError::MalformedAtom(s.to_string()))?;
        InduAtom::new(a.trim().parse()?, d.trim().parse()?)
            .ok_or_else(|| InduError::InvalidAtom(s.to_string()))
    }
}

/// All 25 valid atoms, in canonical order (Allen index, then `<`, `=`, `>`).
pub fn valid_atoms() -> Vec<InduAtom> {
    BaseRelation::ALL
        .into_iter()
        .flat_map(|a| DurSign::ALL.into_iter().filter_map(move |d| InduAtom::new(a, d)))
        .collect()
}

fn valid_mask() -> u64 {
    valid_atoms().iter().fold(0, |m, a| m | a.bit())
}

/// A set of valid INDU atoms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct InduRelation(u64);

impl InduRelation {
    pub const EMPTY: InduRelation = InduRelation(0);

    pub fn full() -> Self {
        InduRelation(valid_mask())
    }

    pub fn of(atoms: &[InduAtom]) -> Self {
        atoms.iter().fold(Self::EMPTY, |r, &a| r.with(a))
    }

    /// Adds `atom`; invalid atoms are ignored.
    pub fn with(self, atom: InduAtom) -> Self {
        if atom.is_valid() {
            InduRelation(self.0 | atom.bit())
        } else {
            self
        }
    }

    pub fn contains(self, atom: InduAtom) -> bool {
        self.0 & atom.bit() != 0
    }

    pub fn atoms(self) -> impl Iterator<Item = InduAtom> {
        valid_atoms().into_iter().filter(move |a| self.contains(*a))
    }

    /// Every valid atom whose Allen part is in `allen` and whose sign is in
    /// `signs`. An empty slice on either side stands for "any".
    ///
    /// This is how the `?` placeholder is read: `{?=}` is every atom with
    /// sign `=`, `{s?}` is every valid sign paired with `s`.
    pub fn from_parts(allen: Relation, signs: &[DurSign]) -> Self {
        let allen = if allen.is_empty() { Relation::FULL } else { allen };
        let signs = if signs.is_empty() { &DurSign::ALL[..] } else { signs };
        valid_atoms()
            .into_iter()
            .filter(|a| allen.contains(a.allen) && signs.contains(&a.dur))
            .fold(Self::EMPTY, Self::with)
    }

    /// Union of the Allen parts.
    pub fn project(self) -> Relation {
        self.atoms().fold(Relation::EMPTY, |r, a| r.with(a.allen))
    }
}

impl RelationAlgebra for InduRelation {
    fn empty() -> Self {
        Self::EMPTY
    }

    fn full() -> Self {
        InduRelation::full()
    }

    fn identity() -> Self {
        Self::EMPTY.with(InduAtom {
            allen: BaseRelation::Equals,
            dur: DurSign::Same,
        })
    }

    fn converse(self) -> Self {
        self.atoms().fold(Self::EMPTY, |r, a| r.with(a.converse()))
    }

    /// Allen parts compose through the Allen table, signs by transitivity of
    /// the order on durations; pairs violating validity are dropped.
    fn compose(self, other: Self) -> Self {
        let mut out = Self::EMPTY;
        for a in self.atoms() {
            for b in other.atoms() {
                let allen = Relation::atom(a.allen).compose(Relation::atom(b.allen));
                for &dur in a.dur.compose(b.dur) {
                    for x in allen.atoms() {
                        out = out.with(InduAtom { allen: x, dur });
                    }
                }
            }
        }
        out
    }

    fn intersect(self, other: Self) -> Self {
        InduRelation(self.0 & other.0)
    }

    fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    fn singletons(self) -> Vec<Self> {
        self.atoms().map(|a| Self::EMPTY.with(a)).collect()
    }
}

impl fmt::Debug for InduRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for InduRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

impl FromStr for InduRelation {
    type Err = InduError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| InduError::MalformedRelation(t.to_string()))?;
        inner
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .try_fold(Self::EMPTY, |r, a| Ok(r.with(a.parse()?)))
    }
}

pub type InduNetwork = Network<InduRelation>;

/// Drops duration signs cell by cell.
pub fn project_allen(n: &InduNetwork) -> crate::allen::Qcn {
    let mut q = crate::allen::Qcn::new(n.names().iter().cloned())
        .expect("names of a valid network are unique");
    for (i, j) in n.pairs() {
        q.set(i, j, n.get(i, j).project());
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use BaseRelation::*;
    use DurSign::*;

    fn atom(a: BaseRelation, d: DurSign) -> InduAtom {
        InduAtom::new(a, d).unwrap()
    }

    #[test]
    fn validity_examples() {
        let atoms = valid_atoms();
        assert_eq!(atoms.len(), 25);
        assert!(atoms.contains(&atom(Starts, Shorter)));
        assert!(InduAtom::new(Equals, Shorter).is_none());
        assert!(InduAtom::new(During, Longer).is_none());
    }

    #[test]
    fn converse_examples() {
        let r = InduRelation::of(&[atom(Meets, Shorter)]);
        assert_eq!(r.converse(), InduRelation::of(&[atom(MetBy, Longer)]));
        let id = InduRelation::identity();
        assert_eq!(id.converse(), id);
    }

    #[test]
    fn compose_examples() {
        let id = InduRelation::identity();
        let r: InduRelation = "{m^<,o^=,d^<}".parse().unwrap();
        assert_eq!(id.compose(r), r);
        let ml = InduRelation::of(&[atom(Meets, Shorter)]);
        assert_eq!(ml.compose(ml), InduRelation::of(&[atom(Before, Shorter)]));
        // (s,<) ∘ (di,>) can only keep signs valid for each Allen atom.
        let c = InduRelation::of(&[atom(Starts, Shorter)])
            .compose(InduRelation::of(&[atom(Contains, Longer)]));
        assert!(c.atoms().all(|a| a.is_valid()));
        assert!(!c.atoms().any(|a| a.allen == During && a.dur == Longer));
    }

    #[test]
    fn placeholder_reading() {
        // {?=}: every atom with equal durations.
        let eq = InduRelation::from_parts(Relation::EMPTY, &[Same]);
        assert_eq!(eq.to_string(), "{b^=,bi^=,m^=,mi^=,o^=,oi^=,e^=}");
        // {s?}: s admits only <.
        let s = InduRelation::from_parts(Relation::atom(Starts), &[]);
        assert_eq!(s.to_string(), "{s^<}");
        // {m≤}
        let m = InduRelation::from_parts(Relation::atom(Meets), &[Shorter, Same]);
        assert_eq!(m.to_string(), "{m^<,m^=}");
    }

    #[test]
    fn parse_rejects_invalid_atoms() {
        assert!(matches!("{e^<}".parse::<InduRelation>(), Err(InduError::InvalidAtom(_))));
        assert!(matches!("{m}".parse::<InduRelation>(), Err(InduError::MalformedAtom(_))));
        assert!("{m^?}".parse::<InduRelation>().is_err());
    }

    #[test]
    fn projection_examples() {
        let r: InduRelation = "{m^<,m^=}".parse().unwrap();
        assert_eq!(r.project(), Relation::atom(Meets));
        assert_eq!(InduRelation::identity().project(), Relation::atom(Equals));
    }

    #[test]
    fn diagonal_only_network_unchanged() {
        let n = InduNetwork::new(["a", "b"]).unwrap();
        assert_eq!(n.close().into_network(), n);
    }

    #[test]
    fn two_fixed_timers_equal_to_bake_stay_indu_consistent() {
        // Pure INDU cannot see that 60 min and 30 min differ; the metric
        // layer catches it.
        let mut n = InduNetwork::new(["bake", "hour", "half_hour"]).unwrap();
        let eq = InduRelation::identity();
        n.constrain_named("bake", "hour", eq).unwrap();
        n.constrain_named("bake", "half_hour", eq).unwrap();
        assert!(n.close().is_consistent());
    }

    #[test]
    fn text_round_trip() {
        let text = "intervals a b\na b {m^<,m^=}\n";
        let n = InduNetwork::parse_text(text).unwrap();
        assert_eq!(n.to_text(), text);
    }
}
