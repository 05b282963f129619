//! Allen's interval algebra: the 13 base relations, disjunctive relations,
//! qualitative networks over them and a small brute-force realization
//! oracle.
//!
//! Atoms are kept in a fixed canonical order
//! (`b, bi, m, mi, o, oi, d, di, s, si, f, fi, e`). Every deterministic
//! choice in the crate (scenario search, serialization) follows that order.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use thiserror::Error;

use crate::network::{Network, RelationAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllenError {
    #[error("unknown Allen relation `{0}`")]
    UnknownAtom(String),
    #[error("malformed relation `{0}`: expected `{{atom,atom,...}}`")]
    MalformedRelation(String),
    #[error("realization oracle handles at most {max} intervals, got {got}")]
    OracleScale { max: usize, got: usize },
}

/// One of the 13 mutually exclusive Allen relations between two convex
/// intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum BaseRelation {
    Before = 0,
    After,
    Meets,
    MetBy,
    Overlaps,
    OverlappedBy,
    During,
    Contains,
    Starts,
    StartedBy,
    Finishes,
    FinishedBy,
    Equals,
}

impl BaseRelation {
    pub const ALL: [BaseRelation; 13] = [
        BaseRelation::Before,
        BaseRelation::After,
        BaseRelation::Meets,
        BaseRelation::MetBy,
        BaseRelation::Overlaps,
        BaseRelation::OverlappedBy,
        BaseRelation::During,
        BaseRelation::Contains,
        BaseRelation::Starts,
        BaseRelation::StartedBy,
        BaseRelation::Finishes,
        BaseRelation::FinishedBy,
        BaseRelation::Equals,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn converse(self) -> Self {
        use BaseRelation::*;
        match self {
            Before => After,
            After => Before,
            Meets => MetBy,
            MetBy => Meets,
            Overlaps => OverlappedBy,
            OverlappedBy => Overlaps,
            During => Contains,
            Contains => During,
            Starts => StartedBy,
            StartedBy => Starts,
            Finishes => FinishedBy,
            FinishedBy => Finishes,
            Equals => Equals,
        }
    }

    /// Canonical short name.
    pub fn name(self) -> &'static str {
        use BaseRelation::*;
        match self {
            Before => "b",
            After => "bi",
            Meets => "m",
            MetBy => "mi",
            Overlaps => "o",
            OverlappedBy => "oi",
            During => "d",
            Contains => "di",
            Starts => "s",
            StartedBy => "si",
            Finishes => "f",
            FinishedBy => "fi",
            Equals => "e",
        }
    }

    /// The atom holding between `x = (x_start, x_end)` and `y = (y_start, y_end)`.
    ///
    /// Both intervals must satisfy `start < end`.
    pub fn of<T: Ord>(x: (T, T), y: (T, T)) -> Self {
        use std::cmp::Ordering::*;
        use BaseRelation::*;
        let (xs, xe) = x;
        let (ys, ye) = y;
        debug_assert!(xs < xe && ys < ye);
        match (xe.cmp(&ys), ye.cmp(&xs)) {
            (Less, _) => return Before,
            (_, Less) => return After,
            (Equal, _) => return Meets,
            (_, Equal) => return MetBy,
            _ => {}
        }
        match (xs.cmp(&ys), xe.cmp(&ye)) {
            (Equal, Equal) => Equals,
            (Equal, Less) => Starts,
            (Equal, Greater) => StartedBy,
            (Greater, Equal) => Finishes,
            (Less, Equal) => FinishedBy,
            (Less, Less) => Overlaps,
            (Less, Greater) => Contains,
            (Greater, Less) => During,
            (Greater, Greater) => OverlappedBy,
        }
    }
}

impl fmt::Display for BaseRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseRelation {
    type Err = AllenError;

    /// Accepts canonical names and the usual alias spellings
    /// (`<`, `>`, `p`, `pi`, `a`, `eq`, `=`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use BaseRelation::*;
        Ok(match s.trim() {
            "b" | "<" | "p" => Before,
            "bi" | ">" | "pi" | "a" => After,
            "m" => Meets,
            "mi" => MetBy,
            "o" => Overlaps,
            "oi" => OverlappedBy,
            "d" => During,
            "di" => Contains,
            "s" => Starts,
            "si" => StartedBy,
            "f" => Finishes,
            "fi" => FinishedBy,
            "e" | "eq" | "=" => Equals,
            other => return Err(AllenError::UnknownAtom(other.to_string())),
        })
    }
}

// Row = first operand, column = second operand, bit i = atom with canonical
// index i. Generated by enumerating endpoint orders of three intervals; the
// same enumeration is kept as a test.
const COMPOSITION: [[u16; 13]; 13] = [
    // b
    [0x0001, 0x1fff, 0x0001, 0x0155, 0x0001, 0x0155, 0x0155, 0x0001, 0x0001, 0x0001, 0x0155, 0x0001, 0x0001],
    // bi
    [0x1fff, 0x0002, 0x046a, 0x0002, 0x046a, 0x0002, 0x046a, 0x0002, 0x046a, 0x0002, 0x0002, 0x0002, 0x0002],
    // m
    [0x0001, 0x02aa, 0x0001, 0x1c00, 0x0001, 0x0150, 0x0150, 0x0001, 0x0004, 0x0004, 0x0150, 0x0001, 0x0004],
    // mi
    [0x0895, 0x0002, 0x1300, 0x0002, 0x0460, 0x0002, 0x0460, 0x0002, 0x0460, 0x0002, 0x0008, 0x0008, 0x0008],
    // o
    [0x0001, 0x02aa, 0x0001, 0x02a0, 0x0015, 0x1ff0, 0x0150, 0x0895, 0x0010, 0x0890, 0x0150, 0x0015, 0x0010],
    // oi
    [0x0895, 0x0002, 0x0890, 0x0002, 0x1ff0, 0x002a, 0x0460, 0x02aa, 0x0460, 0x002a, 0x0020, 0x02a0, 0x0020],
    // d
    [0x0001, 0x0002, 0x0001, 0x0002, 0x0155, 0x046a, 0x0040, 0x1fff, 0x0040, 0x046a, 0x0040, 0x0155, 0x0040],
    // di
    [0x0895, 0x02aa, 0x0890, 0x02a0, 0x0890, 0x02a0, 0x1ff0, 0x0080, 0x0890, 0x0080, 0x02a0, 0x0080, 0x0080],
    // s
    [0x0001, 0x0002, 0x0001, 0x0008, 0x0015, 0x0460, 0x0040, 0x0895, 0x0100, 0x1300, 0x0040, 0x0015, 0x0100],
    // si
    [0x0895, 0x0002, 0x0890, 0x0008, 0x0890, 0x0020, 0x0460, 0x0080, 0x1300, 0x0200, 0x0020, 0x0080, 0x0200],
    // f
    [0x0001, 0x0002, 0x0004, 0x0002, 0x0150, 0x002a, 0x0040, 0x02aa, 0x0040, 0x002a, 0x0400, 0x1c00, 0x0400],
    // fi
    [0x0001, 0x02aa, 0x0004, 0x02a0, 0x0010, 0x02a0, 0x0150, 0x0080, 0x0010, 0x0080, 0x1c00, 0x0800, 0x0800],
    // e
    [0x0001, 0x0002, 0x0004, 0x0008, 0x0010, 0x0020, 0x0040, 0x0080, 0x0100, 0x0200, 0x0400, 0x0800, 0x1000],
];

const FULL_MASK: u16 = (1 << 13) - 1;

/// A disjunction of base relations. The empty relation is a contradiction,
/// the full one carries no information.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Relation(u16);

impl Relation {
    pub const EMPTY: Relation = Relation(0);
    pub const FULL: Relation = Relation(FULL_MASK);

    pub fn from_bits(bits: u16) -> Self {
        Relation(bits & FULL_MASK)
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn atom(atom: BaseRelation) -> Self {
        Relation(1 << atom.index())
    }

    pub fn of(atoms: &[BaseRelation]) -> Self {
        atoms.iter().fold(Self::EMPTY, |r, &a| r.with(a))
    }

    pub fn with(self, atom: BaseRelation) -> Self {
        Relation(self.0 | (1 << atom.index()))
    }

    pub fn contains(self, atom: BaseRelation) -> bool {
        self.0 & (1 << atom.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_full(self) -> bool {
        self.0 == FULL_MASK
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// The single atom of a singleton relation.
    pub fn single(self) -> Option<BaseRelation> {
        if self.len() == 1 {
            BaseRelation::from_index(self.0.trailing_zeros() as usize)
        } else {
            None
        }
    }

    pub fn union(self, other: Self) -> Self {
        Relation(self.0 | other.0)
    }

    pub fn intersect(self, other: Self) -> Self {
        Relation(self.0 & other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Atoms in canonical order.
    pub fn atoms(self) -> impl Iterator<Item = BaseRelation> {
        BaseRelation::ALL
            .into_iter()
            .filter(move |a| self.contains(*a))
    }

    pub fn converse(self) -> Self {
        self.atoms()
            .fold(Self::EMPTY, |r, a| r.with(a.converse()))
    }

    pub fn compose(self, other: Self) -> Self {
        if self.is_full() && other.is_full() {
            return Self::FULL;
        }
        let mut out = 0u16;
        for a in self.atoms() {
            for b in other.atoms() {
                out |= COMPOSITION[a.index()][b.index()];
                if out == FULL_MASK {
                    return Self::FULL;
                }
            }
        }
        Relation(out)
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.atoms().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a.name())?;
        }
        f.write_str("}")
    }
}

impl FromStr for Relation {
    type Err = AllenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| AllenError::MalformedRelation(t.to_string()))?;
        inner
            .split(',')
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .try_fold(Relation::EMPTY, |r, a| Ok(r.with(a.parse()?)))
    }
}

impl From<BaseRelation> for Relation {
    fn from(a: BaseRelation) -> Self {
        Relation::atom(a)
    }
}

impl RelationAlgebra for Relation {
    fn empty() -> Self {
        Relation::EMPTY
    }
    fn full() -> Self {
        Relation::FULL
    }
    fn identity() -> Self {
        Relation::atom(BaseRelation::Equals)
    }
    fn converse(self) -> Self {
        Relation::converse(self)
    }
    fn compose(self, other: Self) -> Self {
        Relation::compose(self, other)
    }
    fn intersect(self, other: Self) -> Self {
        Relation::intersect(self, other)
    }
    fn len(self) -> usize {
        Relation::len(self)
    }
    fn singletons(self) -> Vec<Self> {
        self.atoms().map(Relation::atom).collect()
    }
}

/// A qualitative constraint network over named intervals.
pub type Qcn = Network<Relation>;

/// A concrete placement of every interval on the rational line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub intervals: Vec<(String, Rational64, Rational64)>,
}

impl Realization {
    pub fn get(&self, name: &str) -> Option<(Rational64, Rational64)> {
        self.intervals
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|&(_, s, e)| (s, e))
    }

    /// Does this placement satisfy every cell of `n`?
    pub fn satisfies(&self, n: &Qcn) -> bool {
        let names = n.names();
        for i in 0..names.len() {
            for j in 0..names.len() {
                let (Some(x), Some(y)) = (self.get(&names[i]), self.get(&names[j])) else {
                    return false;
                };
                if !n.get(i, j).contains(BaseRelation::of(x, y)) {
                    return false;
                }
            }
        }
        true
    }
}

pub const ORACLE_MAX_INTERVALS: usize = 4;

/// Brute-force witness search: places endpoints on ranks `0..2n` interval by
/// interval, checking each cell as soon as both sides are placed. Every weak
/// order of the endpoints is reachable this way.
pub fn realize_small(n: &Qcn) -> Result<Option<Realization>, AllenError> {
    if n.len() > ORACLE_MAX_INTERVALS {
        return Err(AllenError::OracleScale {
            max: ORACLE_MAX_INTERVALS,
            got: n.len(),
        });
    }
    let ranks = 2 * n.len() as i64;
    let mut placed: Vec<(i64, i64)> = Vec::with_capacity(n.len());

    fn place(n: &Qcn, ranks: i64, placed: &mut Vec<(i64, i64)>) -> bool {
        let k = placed.len();
        if k == n.len() {
            return true;
        }
        for s in 0..ranks {
            for e in (s + 1)..ranks {
                let ok = placed.iter().enumerate().all(|(j, &y)| {
                    n.get(k, j).contains(BaseRelation::of((s, e), y))
                });
                if ok {
                    placed.push((s, e));
                    if place(n, ranks, placed) {
                        return true;
                    }
                    placed.pop();
                }
            }
        }
        false
    }

    if n.has_empty_cell() || !place(n, ranks, &mut placed) {
        return Ok(None);
    }
    Ok(Some(Realization {
        intervals: n
            .names()
            .iter()
            .zip(placed)
            .map(|(name, (s, e))| (name.clone(), Rational64::from(s), Rational64::from(e)))
            .collect(),
    }))
}
