//! Procedural-text object model and its compilation into hybrid networks.
//!
//! Encoding rules, applied per scenario:
//!
//! * preliminaries happen before the first step, in any order among
//!   themselves;
//! * each step follows the previous one (`{bi, mi}`) unless something else
//!   anchors it;
//! * `meanwhile` puts a step during or finishing the previous one;
//! * `for <duration>` bounds the action's length;
//! * `until "<state>"` makes the action meet the state;
//! * both together bound the length by `(0, N]`;
//! * `last <duration> of <ref>` introduces a timer finishing `ref` that the
//!   step starts;
//! * `sporadic <a> in <c>` makes `c` contain `a`;
//! * alternation and repetition counts carry no algebraic constraint; they
//!   survive as markers for the workflow exporter.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::allen::{BaseRelation, Relation};
use crate::metric::{BoundWindow, HybridNetwork, MetricError, Minutes};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecipeError {
    #[error("unparseable duration `{0}`")]
    Duration(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("step `{0}` is marked `meanwhile` but has no previous step")]
    MeanwhileWithoutAntecedent(String),
    #[error("contradictory constraints between `{0}` and `{1}`")]
    Contradiction(String, String),
    #[error("too many alternative branches ({0}, max {MAX_BRANCHES})")]
    TooManyBranches(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

pub const MAX_BRANCHES: usize = 10;

/// Byte range in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A parsed duration phrase such as `1hr`, `2–3 hours` or `about 25 minutes`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DurationPhrase {
    pub text: String,
    pub lo: Minutes,
    pub hi: Minutes,
    pub approximate: bool,
}

impl DurationPhrase {
    /// Stated bounds, widened by `about_factor` on each side when the phrase
    /// is approximate.
    pub fn window(&self, about_factor: Minutes) -> BoundWindow {
        if self.approximate {
            let one = Minutes::from_integer(1);
            BoundWindow::closed(self.lo * (one - about_factor), self.hi * (one + about_factor))
                .expect("lo <= hi for a parsed phrase")
        } else {
            BoundWindow::closed(self.lo, self.hi).expect("lo <= hi for a parsed phrase")
        }
    }

    /// The largest stated value, before any widening.
    pub fn nominal_max(&self) -> Minutes {
        self.hi
    }

    pub fn is_precise(&self) -> bool {
        self.lo == self.hi && !self.approximate
    }
}

impl fmt::Display for DurationPhrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

fn parse_number(s: &str) -> Option<(Minutes, &str)> {
    let end = s
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || c == '.' || c == '/'))
        .map_or(s.len(), |(i, _)| i);
    let (num, rest) = s.split_at(end);
    let value = if let Some((n, d)) = num.split_once('/') {
        let (n, d): (i64, i64) = (n.parse().ok()?, d.parse().ok()?);
        (d != 0).then(|| Minutes::new(n, d))?
    } else if let Some((whole, frac)) = num.split_once('.') {
        let scale = 10i64.checked_pow(frac.len() as u32)?;
        let whole: i64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
        let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
        Minutes::new(whole * scale + frac, scale)
    } else {
        Minutes::from_integer(num.parse().ok()?)
    };
    Some((value, rest))
}

/// Parses a duration phrase into minutes.
///
/// Grammar: optional `about`, a number, an optional range (`-`, `–`, `—` or
/// `to` and a second number), then a unit (`min`, `mins`, `minute(s)`, `h`,
/// `hr`, `hrs`, `hour(s)`). Numbers may be decimals or `p/q` fractions.
pub fn parse_duration(text: &str) -> Result<DurationPhrase, RecipeError> {
    let bad = || RecipeError::Duration(text.to_string());
    let lower = text.trim().to_lowercase();
    let mut s = lower.as_str();
    let mut approximate = false;
    for prefix in ["about ", "approximately ", "approx. ", "around ", "~"] {
        if let Some(rest) = s.strip_prefix(prefix) {
            approximate = true;
            s = rest.trim_start();
            break;
        }
    }
    let (lo, rest) = parse_number(s).ok_or_else(bad)?;
    let mut s = rest.trim_start();
    let mut hi = lo;
    for sep in ["-", "–", "—", "to "] {
        if let Some(rest) = s.strip_prefix(sep) {
            let (v, rest) = parse_number(rest.trim_start()).ok_or_else(bad)?;
            hi = v;
            s = rest.trim_start();
            break;
        }
    }
    let factor = match s.trim() {
        "m" | "min" | "mins" | "minute" | "minutes" => 1,
        "h" | "hr" | "hrs" | "hour" | "hours" => 60,
        _ => return Err(bad()),
    };
    let (lo, hi) = (lo * factor, hi * factor);
    if lo <= Minutes::from_integer(0) || hi < lo {
        return Err(bad());
    }
    Ok(DurationPhrase {
        text: text.trim().to_string(),
        lo,
        hi,
        approximate,
    })
}

/// Window for a duration phrase with the default `about` factor.
pub fn encode_duration(text: &str) -> Result<BoundWindow, RecipeError> {
    Ok(parse_duration(text)?.window(EncodeOptions::default().about_factor))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Preliminary,
    Step,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionNode {
    pub id: String,
    pub text: String,
    pub kind: ActionKind,
    pub span: Span,
    /// Alternative branch this action belongs to, if any.
    pub branch: Option<String>,
    pub meanwhile: bool,
    pub duration: Option<DurationPhrase>,
    /// State id the action runs until.
    pub until: Option<String>,
    /// `last <duration> of <ref>`.
    pub last: Option<(DurationPhrase, String)>,
    /// Starts at the same time as this action.
    pub with: Option<String>,
}

impl ActionNode {
    pub fn new(id: &str, text: &str, kind: ActionKind, span: Span) -> Self {
        ActionNode {
            id: id.to_string(),
            text: text.to_string(),
            kind,
            span,
            branch: None,
            meanwhile: false,
            duration: None,
            until: None,
            last: None,
            with: None,
        }
    }

    /// First word of the instruction, lowercased.
    pub fn verb(&self) -> String {
        self.text
            .split_whitespace()
            .next()
            .unwrap_or_default()
            .to_lowercase()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateNode {
    pub id: String,
    pub predicate: String,
    pub span: Span,
    pub branch: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TimerOrigin {
    Declared,
    /// Generated by `last <duration> of <ref>` on this step.
    LastOf(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimerNode {
    pub id: String,
    pub phrase: DurationPhrase,
    pub origin: TimerOrigin,
    pub span: Span,
    pub branch: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitRelation {
    pub from: String,
    pub relation: Relation,
    pub to: String,
    pub span: Span,
    pub branch: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RepetitionMode {
    SporadicIn(String),
    AlternatesWith(String),
    Times(u32),
    Until(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RepetitionMarker {
    pub target: String,
    pub mode: RepetitionMode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkerNode {
    pub marker: RepetitionMarker,
    pub span: Span,
    pub branch: Option<String>,
}

/// An optional block of directives; scenarios include or exclude it whole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternativeBranch {
    pub id: String,
    pub guard: Option<String>,
    pub span: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Recipe {
    pub title: String,
    /// Preliminaries and steps, in document order.
    pub actions: Vec<ActionNode>,
    pub states: Vec<StateNode>,
    pub timers: Vec<TimerNode>,
    pub relations: Vec<ExplicitRelation>,
    pub markers: Vec<MarkerNode>,
    pub branches: Vec<AlternativeBranch>,
}

impl Recipe {
    pub fn action(&self, id: &str) -> Option<&ActionNode> {
        self.actions.iter().find(|a| a.id == id)
    }

    pub fn preliminaries(&self) -> impl Iterator<Item = &ActionNode> {
        self.actions.iter().filter(|a| a.kind == ActionKind::Preliminary)
    }

    pub fn steps(&self) -> impl Iterator<Item = &ActionNode> {
        self.actions.iter().filter(|a| a.kind == ActionKind::Step)
    }

    /// Every interval id: actions, then states, then timers.
    pub fn interval_ids(&self) -> Vec<&str> {
        self.actions
            .iter()
            .map(|a| a.id.as_str())
            .chain(self.states.iter().map(|s| s.id.as_str()))
            .chain(self.timers.iter().map(|t| t.id.as_str()))
            .collect()
    }

    /// Source span of any node.
    pub fn span_of(&self, id: &str) -> Option<Span> {
        self.actions
            .iter()
            .find(|a| a.id == id)
            .map(|a| a.span)
            .or_else(|| self.states.iter().find(|s| s.id == id).map(|s| s.span))
            .or_else(|| self.timers.iter().find(|t| t.id == id).map(|t| t.span))
    }

    /// Checks id uniqueness and that every reference resolves. `external`
    /// ids (knowledge anchors) count as defined.
    pub fn validate(&self, external: &[String]) -> Result<(), RecipeError> {
        let mut seen = BTreeSet::new();
        for id in self.interval_ids() {
            if !seen.insert(id) {
                return Err(RecipeError::DuplicateId(id.to_string()));
            }
        }
        let known = |id: &str| seen.contains(id) || external.iter().any(|e| e == id);
        let need = |id: &str| {
            if known(id) {
                Ok(())
            } else {
                Err(RecipeError::UnknownId(id.to_string()))
            }
        };
        for a in &self.actions {
            if let Some(s) = &a.until {
                need(s)?;
            }
            if let Some((_, r)) = &a.last {
                need(r)?;
            }
            if let Some(w) = &a.with {
                need(w)?;
            }
        }
        for r in &self.relations {
            need(&r.from)?;
            need(&r.to)?;
        }
        for m in &self.markers {
            need(&m.marker.target)?;
            match &m.marker.mode {
                RepetitionMode::SporadicIn(x)
                | RepetitionMode::AlternatesWith(x)
                | RepetitionMode::Until(x) => need(x)?,
                RepetitionMode::Times(_) => {}
            }
        }
        Ok(())
    }
}

/// Tunable readings of connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Text order between consecutive steps.
    pub text_order: Relation,
    /// `meanwhile`: the marked step against the previous one.
    pub meanwhile: Relation,
    /// `at the same time as` (`with <id>`).
    pub same_time: Relation,
    /// Relative widening of `about N` on each side.
    pub about_factor: Minutes,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        use BaseRelation::*;
        EncodeOptions {
            text_order: Relation::of(&[After, MetBy]),
            meanwhile: Relation::of(&[During, Finishes]),
            same_time: Relation::of(&[Starts, StartedBy, Equals]),
            about_factor: Minutes::new(1, 5),
        }
    }
}

/// One XOR combination of a recipe, compiled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    /// `base`, or the included branch ids sorted and joined with `+`.
    pub label: String,
    pub branches: Vec<String>,
    pub network: HybridNetwork,
    /// Action ids in document order.
    pub actions: Vec<String>,
    pub markers: Vec<RepetitionMarker>,
}

fn included(branch: &Option<String>, active: &BTreeSet<&str>) -> bool {
    branch.as_deref().is_none_or(|b| active.contains(b))
}

struct Builder<'a> {
    net: HybridNetwork,
    opts: &'a EncodeOptions,
}

impl Builder<'_> {
    fn allen(&mut self, a: &str, b: &str, r: Relation) -> Result<(), RecipeError> {
        let cell = self
            .net
            .constrain_allen(a, b, r)
            .map_err(|_| RecipeError::UnknownId(format!("{a} or {b}")))?;
        if cell.is_empty() {
            return Err(RecipeError::Contradiction(a.to_string(), b.to_string()));
        }
        Ok(())
    }

    fn duration(&mut self, a: &str, w: BoundWindow) -> Result<(), RecipeError> {
        self.net.constrain_duration(a, w)?;
        let (from, to) = (crate::metric::start_id(a), crate::metric::end_id(a));
        let (f, t) = (self.net.stp().require(&from)?, self.net.stp().require(&to)?);
        if self.net.stp().asserted(f, t).is_empty() {
            return Err(RecipeError::Contradiction(from, to));
        }
        Ok(())
    }

    /// Duration, until-state, last-of, with and meanwhile rules for one
    /// action. Returns the interval the action is anchored to, if any.
    fn action_rules(&mut self, a: &ActionNode, previous: Option<&str>) -> Result<Option<String>, RecipeError> {
        let mut anchor = None;
        match (&a.until, &a.duration) {
            (Some(state), Some(d)) => {
                self.allen(&a.id, state, Relation::atom(BaseRelation::Meets))?;
                self.duration(&a.id, BoundWindow::up_to(d.nominal_max())?)?;
            }
            (Some(state), None) => self.allen(&a.id, state, Relation::atom(BaseRelation::Meets))?,
            (None, Some(d)) => self.duration(&a.id, d.window(self.opts.about_factor))?,
            (None, None) => {}
        }
        if let Some((_, reference)) = &a.last {
            let timer = last_timer_id(&a.id);
            self.allen(&timer, reference, Relation::atom(BaseRelation::Finishes))?;
            self.allen(&a.id, &timer, Relation::atom(BaseRelation::Starts))?;
            anchor = Some(reference.clone());
        }
        if let Some(other) = &a.with {
            self.allen(&a.id, other, self.opts.same_time)?;
        }
        if a.meanwhile {
            let prev = previous.ok_or_else(|| RecipeError::MeanwhileWithoutAntecedent(a.id.clone()))?;
            self.allen(&a.id, prev, self.opts.meanwhile)?;
            anchor = Some(prev.to_string());
        }
        Ok(anchor)
    }
}

/// Id of the timer generated by `last <duration> of <ref>` on `step`.
pub fn last_timer_id(step: &str) -> String {
    format!("{step}_last")
}

/// Which rule families apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum EncodeMode {
    /// Full recipe: preliminaries and text order included.
    Recipe,
    /// Domain knowledge: only what is stated explicitly.
    Knowledge,
}

/// Compiles one scenario into `net` (which must already hold every interval
/// of the scenario).
pub(crate) fn encode_into(
    recipe: &Recipe,
    active: &BTreeSet<&str>,
    opts: &EncodeOptions,
    mode: EncodeMode,
    net: HybridNetwork,
) -> Result<HybridNetwork, RecipeError> {
    let mut b = Builder { net, opts };

    for t in recipe.timers.iter().filter(|t| included(&t.branch, active)) {
        b.duration(&t.id, t.phrase.window(opts.about_factor))?;
    }

    // Sporadic targets are anchored to their container.
    let mut anchored_to: BTreeMap<&str, String> = BTreeMap::new();
    for m in recipe.markers.iter().filter(|m| included(&m.branch, active)) {
        if let RepetitionMode::SporadicIn(container) = &m.marker.mode {
            b.allen(container, &m.marker.target, Relation::atom(BaseRelation::Contains))?;
            anchored_to.insert(&m.marker.target, container.clone());
        }
        if let RepetitionMode::Until(state) = &m.marker.mode {
            b.allen(&m.marker.target, state, Relation::atom(BaseRelation::Meets))?;
        }
    }

    let explicit_pair = |x: &str, y: &str| {
        recipe.relations.iter().any(|r| {
            included(&r.branch, active) && ((r.from == x && r.to == y) || (r.from == y && r.to == x))
        })
    };

    // Text order, one chain per branch (main text = None).
    let mut chains: BTreeMap<Option<&str>, Vec<&ActionNode>> = BTreeMap::new();
    for a in recipe.steps().filter(|a| included(&a.branch, active)) {
        chains.entry(a.branch.as_deref()).or_default().push(a);
    }
    for prelim in recipe.preliminaries().filter(|a| included(&a.branch, active)) {
        b.action_rules(prelim, None)?;
    }
    for chain in chains.values() {
        let mut previous: Option<&ActionNode> = None;
        for step in chain {
            let anchor = b.action_rules(step, previous.map(|p| p.id.as_str()))?;
            let anchor = anchor.or_else(|| anchored_to.get(step.id.as_str()).cloned());
            if let Some(prev) = previous {
                if mode == EncodeMode::Recipe && anchor.is_none() && !explicit_pair(&step.id, &prev.id) {
                    b.allen(&step.id, &prev.id, opts.text_order)?;
                    // A step after a subordinate one (meanwhile, last-of,
                    // sporadic) also follows what that step was anchored to.
                    let mut sub = prev;
                    while let Some(up) = step_anchor(recipe, sub, &anchored_to) {
                        if up == step.id || explicit_pair(&step.id, &up) {
                            break;
                        }
                        b.allen(&step.id, &up, opts.text_order)?;
                        match recipe.action(&up) {
                            Some(next) => sub = next,
                            None => break,
                        }
                    }
                }
            }
            previous = Some(step);
        }
    }

    if mode == EncodeMode::Recipe {
        if let Some(first) = chains.get(&None).and_then(|c| c.first()) {
            for prelim in recipe.preliminaries().filter(|a| included(&a.branch, active)) {
                b.allen(&prelim.id, &first.id, Relation::atom(BaseRelation::Before))?;
            }
        }
    }

    for r in recipe.relations.iter().filter(|r| included(&r.branch, active)) {
        b.allen(&r.from, &r.to, r.relation)?;
    }
    Ok(b.net)
}

/// The interval a subordinate step hangs off: the previous step for
/// `meanwhile`, the reference for `last ... of`, the container for sporadic
/// actions.
fn step_anchor(recipe: &Recipe, step: &ActionNode, sporadic: &BTreeMap<&str, String>) -> Option<String> {
    if let Some((_, r)) = &step.last {
        return Some(r.clone());
    }
    if let Some(c) = sporadic.get(step.id.as_str()) {
        return Some(c.clone());
    }
    if step.meanwhile {
        let chain: Vec<&ActionNode> = recipe
            .steps()
            .filter(|a| a.branch == step.branch)
            .collect();
        let pos = chain.iter().position(|a| a.id == step.id)?;
        return pos.checked_sub(1).map(|p| chain[p].id.clone());
    }
    None
}

fn scenario_intervals<'a>(recipe: &'a Recipe, active: &BTreeSet<&str>) -> Vec<&'a str> {
    recipe
        .actions
        .iter()
        .filter(|a| included(&a.branch, active))
        .map(|a| a.id.as_str())
        .chain(
            recipe
                .states
                .iter()
                .filter(|s| included(&s.branch, active))
                .map(|s| s.id.as_str()),
        )
        .chain(
            recipe
                .timers
                .iter()
                .filter(|t| included(&t.branch, active))
                .map(|t| t.id.as_str()),
        )
        .collect()
}

/// Every subset of branch ids, smallest bitmask first (so `base` leads).
fn branch_subsets(recipe: &Recipe) -> Result<Vec<Vec<String>>, RecipeError> {
    let mut ids: Vec<&str> = recipe.branches.iter().map(|b| b.id.as_str()).collect();
    ids.sort_unstable();
    if ids.len() > MAX_BRANCHES {
        return Err(RecipeError::TooManyBranches(ids.len()));
    }
    Ok((0u32..(1 << ids.len()))
        .map(|mask| {
            ids.iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, id)| id.to_string())
                .collect()
        })
        .collect())
}

pub fn scenario_label(branches: &[String]) -> String {
    if branches.is_empty() {
        "base".to_string()
    } else {
        branches.join("+")
    }
}

/// One hybrid network per combination of optional branches.
pub fn encode_recipe(recipe: &Recipe) -> Result<Vec<Scenario>, RecipeError> {
    encode_recipe_with(recipe, &EncodeOptions::default())
}

pub fn encode_recipe_with(recipe: &Recipe, opts: &EncodeOptions) -> Result<Vec<Scenario>, RecipeError> {
    recipe.validate(&[])?;
    let mut out = Vec::new();
    for branches in branch_subsets(recipe)? {
        let active: BTreeSet<&str> = branches.iter().map(String::as_str).collect();
        let mut net = HybridNetwork::new();
        for id in scenario_intervals(recipe, &active) {
            net.add_interval(id)?;
        }
        let network = encode_into(recipe, &active, opts, EncodeMode::Recipe, net)?;
        out.push(Scenario {
            label: scenario_label(&branches),
            actions: recipe
                .actions
                .iter()
                .filter(|a| included(&a.branch, &active))
                .map(|a| a.id.clone())
                .collect(),
            markers: recipe
                .markers
                .iter()
                .filter(|m| included(&m.branch, &active))
                .map(|m| m.marker.clone())
                .collect(),
            branches,
            network,
        });
    }
    Ok(out)
}

/// Rows of the phenomena table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhenomenonTag {
    QualitativeDuration,
    PreciseQuantitativeDuration,
    ImpreciseQuantitativeDuration,
    TotalOrder,
    PartialOrder,
    Simultaneity,
    IndeterminateRepetition,
    Alternation,
    SporadicRepetition,
    ExclusiveDisjunction,
}

impl PhenomenonTag {
    pub const ALL: [PhenomenonTag; 10] = [
        PhenomenonTag::QualitativeDuration,
        PhenomenonTag::PreciseQuantitativeDuration,
        PhenomenonTag::ImpreciseQuantitativeDuration,
        PhenomenonTag::TotalOrder,
        PhenomenonTag::PartialOrder,
        PhenomenonTag::Simultaneity,
        PhenomenonTag::IndeterminateRepetition,
        PhenomenonTag::Alternation,
        PhenomenonTag::SporadicRepetition,
        PhenomenonTag::ExclusiveDisjunction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhenomenonTag::QualitativeDuration => "qualitative duration",
            PhenomenonTag::PreciseQuantitativeDuration => "precise quantitative duration",
            PhenomenonTag::ImpreciseQuantitativeDuration => "imprecise quantitative duration",
            PhenomenonTag::TotalOrder => "total order",
            PhenomenonTag::PartialOrder => "partial order",
            PhenomenonTag::Simultaneity => "simultaneity",
            PhenomenonTag::IndeterminateRepetition => "indeterminate repetition",
            PhenomenonTag::Alternation => "alternation",
            PhenomenonTag::SporadicRepetition => "sporadic repetition",
            PhenomenonTag::ExclusiveDisjunction => "exclusive disjunction",
        }
    }
}

impl fmt::Display for PhenomenonTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which phenomena a recipe exhibits.
pub fn phenomena_coverage(r: &Recipe) -> BTreeSet<PhenomenonTag> {
    use PhenomenonTag::*;
    let mut tags = BTreeSet::new();
    for a in &r.actions {
        if a.until.is_some() {
            tags.insert(QualitativeDuration);
        }
        if let Some(d) = &a.duration {
            tags.insert(if d.is_precise() {
                PreciseQuantitativeDuration
            } else {
                ImpreciseQuantitativeDuration
            });
        }
        if let Some((d, _)) = &a.last {
            tags.insert(if d.is_precise() {
                PreciseQuantitativeDuration
            } else {
                ImpreciseQuantitativeDuration
            });
        }
        if a.meanwhile || a.with.is_some() {
            tags.insert(Simultaneity);
        }
    }
    for t in &r.timers {
        tags.insert(if t.phrase.is_precise() {
            PreciseQuantitativeDuration
        } else {
            ImpreciseQuantitativeDuration
        });
    }
    let co_occurring = Relation::of(&[
        BaseRelation::Overlaps,
        BaseRelation::OverlappedBy,
        BaseRelation::During,
        BaseRelation::Contains,
        BaseRelation::Starts,
        BaseRelation::StartedBy,
        BaseRelation::Finishes,
        BaseRelation::FinishedBy,
        BaseRelation::Equals,
    ]);
    if r.relations.iter().any(|x| !x.relation.is_empty() && x.relation.is_subset(co_occurring)) {
        tags.insert(Simultaneity);
    }
    if r.steps().filter(|a| a.branch.is_none()).count() >= 2 {
        tags.insert(TotalOrder);
    }
    if r.preliminaries().count() >= 2 {
        tags.insert(PartialOrder);
    }
    for m in &r.markers {
        tags.insert(match m.marker.mode {
            RepetitionMode::SporadicIn(_) => SporadicRepetition,
            RepetitionMode::AlternatesWith(_) => Alternation,
            RepetitionMode::Until(_) => IndeterminateRepetition,
            RepetitionMode::Times(_) => continue,
        });
    }
    if !r.branches.is_empty() {
        tags.insert(ExclusiveDisjunction);
    }
    tags
}
