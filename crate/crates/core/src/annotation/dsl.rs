//! Line-oriented recipe DSL.
//!
//! ```text
//! recipe "<title>"
//! prelim <id> "<text>"
//! step <id> "<text>" [meanwhile] [for <dur>] [until "<state>"] [last <dur> of <id>] [with <id>]
//! timer <id> <dur>
//! rel <id> {atoms} <id>
//! sporadic <id> in <id>
//! alternate <id> with <id>
//! repeat <id> <n>
//! repeat <id> until "<state>"
//! alt <branch-id> ["<guard>"] {
//!   ...directives...
//! }
//! ```
//!
//! Knowledge files start with `knowledge "<name>"` instead and may declare
//! `anchor <id>` lines naming intervals of the recipe they attach to, and
//! `remove <id>` lines naming recipe nodes they replace.

use std::fmt::Write as _;

use super::AnnotationError;
use crate::allen::Relation;
use crate::recipe::{
    parse_duration, ActionKind, ActionNode, AlternativeBranch, ExplicitRelation, MarkerNode, Recipe,
    RepetitionMarker, RepetitionMode, Span, StateNode, TimerNode, TimerOrigin,
};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Set(String),
    Open,
    Close,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>, AnnotationError> {
    let err = |m: &str| AnnotationError::Syntax {
        line: lineno,
        message: m.to_string(),
    };
    let mut out = Vec::new();
    let mut chars = line.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => break,
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, e)) => s.push(e),
                            None => return Err(err("unterminated string")),
                        },
                        Some((_, ch)) => s.push(ch),
                        None => return Err(err("unterminated string")),
                    }
                }
                out.push(Tok::Str(s));
            }
            '{' => {
                let rest = &line[i + 1..];
                if rest.trim().is_empty() || rest.trim_start().starts_with('#') {
                    out.push(Tok::Open);
                    break;
                }
                let close = rest.find('}').ok_or_else(|| err("unterminated `{`"))?;
                out.push(Tok::Set(line[i..i + close + 2].to_string()));
                while chars.peek().is_some_and(|&(j, _)| j <= i + close + 1) {
                    chars.next();
                }
            }
            '}' => {
                chars.next();
                out.push(Tok::Close);
            }
            _ => {
                let mut w = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if ch.is_whitespace() || matches!(ch, '"' | '{' | '}' | '#') {
                        break;
                    }
                    w.push(ch);
                    chars.next();
                }
                out.push(Tok::Word(w));
            }
        }
    }
    Ok(out)
}

const STEP_KEYWORDS: [&str; 5] = ["meanwhile", "for", "until", "last", "with"];

/// Reads a knowledge-file or recipe-file header.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Header {
    Recipe,
    Knowledge,
}

/// A domain-knowledge file: a recipe fragment plus anchor ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KnowledgeDoc {
    pub name: String,
    pub recipe: Recipe,
    pub anchors: Vec<String>,
    /// Recipe nodes the knowledge replaces.
    pub removes: Vec<String>,
}

pub fn slug(text: &str) -> String {
    let mut out = String::new();
    for c in text.to_lowercase().chars() {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('_') && !out.is_empty() {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

struct Parser {
    header: Header,
    recipe: Recipe,
    anchors: Vec<String>,
    removes: Vec<String>,
    branch: Option<String>,
    lineno: usize,
    span: Span,
}

impl Parser {
    fn err(&self, m: impl Into<String>) -> AnnotationError {
        AnnotationError::Syntax {
            line: self.lineno,
            message: m.into(),
        }
    }

    fn word(&self, toks: &[Tok], k: usize, what: &str) -> Result<String, AnnotationError> {
        match toks.get(k) {
            Some(Tok::Word(w)) => Ok(w.clone()),
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn string(&self, toks: &[Tok], k: usize, what: &str) -> Result<String, AnnotationError> {
        match toks.get(k) {
            Some(Tok::Str(s)) => Ok(s.clone()),
            _ => Err(self.err(format!("expected quoted {what}"))),
        }
    }

    fn end(&self, toks: &[Tok], k: usize) -> Result<(), AnnotationError> {
        if toks.len() > k {
            return Err(self.err("unexpected trailing tokens"));
        }
        Ok(())
    }

    fn state(&mut self, predicate: &str) -> Result<String, AnnotationError> {
        let id = slug(predicate);
        if id.is_empty() {
            return Err(self.err("empty state predicate"));
        }
        match self.recipe.states.iter_mut().find(|s| s.id == id) {
            Some(s) => {
                if self.branch.is_none() {
                    s.branch = None;
                }
            }
            None => self.recipe.states.push(StateNode {
                id: id.clone(),
                predicate: predicate.to_string(),
                span: self.span,
                branch: self.branch.clone(),
            }),
        }
        Ok(id)
    }

    fn duration(&self, words: &[String]) -> Result<crate::recipe::DurationPhrase, AnnotationError> {
        if words.is_empty() {
            return Err(self.err("missing duration"));
        }
        parse_duration(&words.join(" ")).map_err(|e| self.err(e.to_string()))
    }

    fn action(&mut self, toks: &[Tok], kind: ActionKind) -> Result<(), AnnotationError> {
        let id = self.word(toks, 1, "an id")?;
        let text = self.string(toks, 2, "instruction text")?;
        let mut a = ActionNode::new(&id, &text, kind, self.span);
        a.branch = self.branch.clone();
        let mut k = 3;
        while k < toks.len() {
            let Tok::Word(kw) = &toks[k] else {
                return Err(self.err("expected a step modifier"));
            };
            k += 1;
            match kw.as_str() {
                "meanwhile" => {
                    if kind == ActionKind::Preliminary {
                        return Err(self.err("`meanwhile` on a preliminary"));
                    }
                    let has_previous = self
                        .recipe
                        .steps()
                        .any(|s| s.branch == self.branch);
                    if !has_previous {
                        return Err(self.err(format!("step `{id}` is marked `meanwhile` but has no previous step")));
                    }
                    a.meanwhile = true;
                }
                "for" | "last" => {
                    let mut words = Vec::new();
                    while let Some(Tok::Word(w)) = toks.get(k) {
                        if STEP_KEYWORDS.contains(&w.as_str()) || (kw == "last" && w == "of") {
                            break;
                        }
                        words.push(w.clone());
                        k += 1;
                    }
                    let d = self.duration(&words)?;
                    if kw == "for" {
                        a.duration = Some(d);
                    } else {
                        if self.word(toks, k, "`of`")? != "of" {
                            return Err(self.err("expected `of`"));
                        }
                        let target = self.word(toks, k + 1, "an id after `of`")?;
                        k += 2;
                        self.recipe.timers.push(TimerNode {
                            id: crate::recipe::last_timer_id(&id),
                            phrase: d.clone(),
                            origin: TimerOrigin::LastOf(id.clone()),
                            span: self.span,
                            branch: self.branch.clone(),
                        });
                        a.last = Some((d, target));
                    }
                }
                "until" => {
                    let p = self.string(toks, k, "state")?;
                    k += 1;
                    a.until = Some(self.state(&p)?);
                }
                "with" => {
                    a.with = Some(self.word(toks, k, "an id after `with`")?);
                    k += 1;
                }
                other => return Err(self.err(format!("unknown step modifier `{other}`"))),
            }
        }
        self.recipe.actions.push(a);
        Ok(())
    }

    fn marker(&mut self, target: String, mode: RepetitionMode) {
        self.recipe.markers.push(MarkerNode {
            marker: RepetitionMarker { target, mode },
            span: self.span,
            branch: self.branch.clone(),
        });
    }

    fn directive(&mut self, toks: &[Tok]) -> Result<(), AnnotationError> {
        let head = self.word(toks, 0, "a directive")?;
        match head.as_str() {
            "recipe" | "knowledge" => Err(self.err(format!("repeated `{head}` header"))),
            "prelim" => self.action(toks, ActionKind::Preliminary),
            "step" => self.action(toks, ActionKind::Step),
            "timer" => {
                let id = self.word(toks, 1, "a timer id")?;
                let words: Vec<String> = toks[2..]
                    .iter()
                    .map(|t| match t {
                        Tok::Word(w) => Ok(w.clone()),
                        _ => Err(self.err("expected a duration")),
                    })
                    .collect::<Result<_, _>>()?;
                let phrase = self.duration(&words)?;
                self.recipe.timers.push(TimerNode {
                    id,
                    phrase,
                    origin: TimerOrigin::Declared,
                    span: self.span,
                    branch: self.branch.clone(),
                });
                Ok(())
            }
            "rel" => {
                let from = self.word(toks, 1, "an id")?;
                let Some(Tok::Set(set)) = toks.get(2) else {
                    return Err(self.err("expected `{atoms}`"));
                };
                let relation: Relation = set.parse().map_err(|e: crate::allen::AllenError| self.err(e.to_string()))?;
                let to = self.word(toks, 3, "an id")?;
                self.end(toks, 4)?;
                self.recipe.relations.push(ExplicitRelation {
                    from,
                    relation,
                    to,
                    span: self.span,
                    branch: self.branch.clone(),
                });
                Ok(())
            }
            "sporadic" | "alternate" => {
                let target = self.word(toks, 1, "an id")?;
                let joiner = if head == "sporadic" { "in" } else { "with" };
                if self.word(toks, 2, &format!("`{joiner}`"))? != joiner {
                    return Err(self.err(format!("expected `{joiner}`")));
                }
                let other = self.word(toks, 3, "an id")?;
                self.end(toks, 4)?;
                let mode = if head == "sporadic" {
                    RepetitionMode::SporadicIn(other)
                } else {
                    RepetitionMode::AlternatesWith(other)
                };
                self.marker(target, mode);
                Ok(())
            }
            "repeat" => {
                let target = self.word(toks, 1, "an id")?;
                match toks.get(2) {
                    Some(Tok::Word(w)) if w == "until" => {
                        let p = self.string(toks, 3, "state")?;
                        self.end(toks, 4)?;
                        let state = self.state(&p)?;
                        self.marker(target, RepetitionMode::Until(state));
                    }
                    Some(Tok::Word(w)) => {
                        let n: u32 = w
                            .parse()
                            .ok()
                            .filter(|&n| n > 0)
                            .ok_or_else(|| self.err("expected a positive count or `until`"))?;
                        self.end(toks, 3)?;
                        self.marker(target, RepetitionMode::Times(n));
                    }
                    _ => return Err(self.err("expected a count or `until`")),
                }
                Ok(())
            }
            "anchor" | "remove" => {
                if self.header != Header::Knowledge {
                    return Err(self.err(format!("`{head}` outside a knowledge file")));
                }
                let id = self.word(toks, 1, "an id")?;
                self.end(toks, 2)?;
                if head == "anchor" {
                    self.anchors.push(id);
                } else {
                    self.removes.push(id);
                }
                Ok(())
            }
            "alt" => {
                if self.branch.is_some() {
                    return Err(self.err("nested `alt` block"));
                }
                let id = self.word(toks, 1, "a branch id")?;
                let (guard, k) = match toks.get(2) {
                    Some(Tok::Str(g)) => (Some(g.clone()), 3),
                    _ => (None, 2),
                };
                if toks.get(k) != Some(&Tok::Open) {
                    return Err(self.err("expected `{` to open the branch"));
                }
                if self.recipe.branches.iter().any(|b| b.id == id) {
                    return Err(AnnotationError::Recipe {
                        line: self.lineno,
                        source: crate::recipe::RecipeError::DuplicateId(id),
                    });
                }
                self.recipe.branches.push(AlternativeBranch {
                    id: id.clone(),
                    guard,
                    span: self.span,
                });
                self.branch = Some(id);
                Ok(())
            }
            other => Err(self.err(format!("unknown directive `{other}`"))),
        }
    }
}

fn parse(text: &str, header: Header) -> Result<(Recipe, Vec<String>, Vec<String>), AnnotationError> {
    let mut p = Parser {
        header,
        recipe: Recipe::default(),
        anchors: Vec::new(),
        removes: Vec::new(),
        branch: None,
        lineno: 0,
        span: Span::default(),
    };
    let mut seen_header = false;
    let mut offset = 0;
    for (k, raw) in text.split_inclusive('\n').enumerate() {
        let line = raw.trim_end_matches(['\n', '\r']);
        p.lineno = k + 1;
        p.span = Span::new(offset, offset + line.len());
        offset += raw.len();
        let toks = tokenize(line, p.lineno)?;
        if toks.is_empty() {
            continue;
        }
        if !seen_header {
            let want = match header {
                Header::Recipe => "recipe",
                Header::Knowledge => "knowledge",
            };
            if toks.first() != Some(&Tok::Word(want.to_string())) {
                return Err(p.err(format!("no {want} header")));
            }
            p.recipe.title = p.string(&toks, 1, "title")?;
            p.end(&toks, 2)?;
            seen_header = true;
            continue;
        }
        if toks == [Tok::Close] {
            if p.branch.take().is_none() {
                return Err(p.err("`}` without an open `alt` block"));
            }
            if let Some(b) = p.recipe.branches.last_mut() {
                b.span.end = p.span.end;
            }
            continue;
        }
        p.directive(&toks)?;
    }
    if !seen_header {
        return Err(AnnotationError::Syntax {
            line: 0,
            message: match header {
                Header::Recipe => "no recipe header".into(),
                Header::Knowledge => "no knowledge header".into(),
            },
        });
    }
    if p.branch.is_some() {
        return Err(p.err("unterminated `alt` block"));
    }
    p.recipe
        .validate(&p.anchors)
        .map_err(|e| AnnotationError::Recipe {
            line: 0,
            source: e,
        })?;
    Ok((p.recipe, p.anchors, p.removes))
}

pub fn parse_recipe_dsl(text: &str) -> Result<Recipe, AnnotationError> {
    parse(text, Header::Recipe).map(|(r, _, _)| r)
}

pub fn parse_knowledge(text: &str) -> Result<KnowledgeDoc, AnnotationError> {
    let (recipe, anchors, removes) = parse(text, Header::Knowledge)?;
    Ok(KnowledgeDoc {
        name: recipe.title.clone(),
        recipe,
        anchors,
        removes,
    })
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

fn write_body(out: &mut String, r: &Recipe, branch: Option<&str>, indent: &str) {
    let here = |b: &Option<String>| b.as_deref() == branch;
    let predicate = |id: &str| {
        r.states
            .iter()
            .find(|s| s.id == id)
            .map_or(id.to_string(), |s| s.predicate.clone())
    };
    for a in r.actions.iter().filter(|a| here(&a.branch)) {
        let kw = match a.kind {
            ActionKind::Preliminary => "prelim",
            ActionKind::Step => "step",
        };
        let _ = write!(out, "{indent}{kw} {} {}", a.id, quote(&a.text));
        if a.meanwhile {
            out.push_str(" meanwhile");
        }
        if let Some(d) = &a.duration {
            let _ = write!(out, " for {d}");
        }
        if let Some(s) = &a.until {
            let _ = write!(out, " until {}", quote(&predicate(s)));
        }
        if let Some((d, target)) = &a.last {
            let _ = write!(out, " last {d} of {target}");
        }
        if let Some(w) = &a.with {
            let _ = write!(out, " with {w}");
        }
        out.push('\n');
    }
    for t in r.timers.iter().filter(|t| here(&t.branch)) {
        if t.origin == TimerOrigin::Declared {
            let _ = writeln!(out, "{indent}timer {} {}", t.id, t.phrase);
        }
    }
    for x in r.relations.iter().filter(|x| here(&x.branch)) {
        let _ = writeln!(out, "{indent}rel {} {} {}", x.from, x.relation, x.to);
    }
    for m in r.markers.iter().filter(|m| here(&m.branch)) {
        let t = &m.marker.target;
        let _ = match &m.marker.mode {
            RepetitionMode::SporadicIn(c) => writeln!(out, "{indent}sporadic {t} in {c}"),
            RepetitionMode::AlternatesWith(c) => writeln!(out, "{indent}alternate {t} with {c}"),
            RepetitionMode::Times(n) => writeln!(out, "{indent}repeat {t} {n}"),
            RepetitionMode::Until(s) => writeln!(out, "{indent}repeat {t} until {}", quote(&predicate(s))),
        };
    }
}

/// Canonical DSL text: base directives grouped by kind in document order,
/// then each `alt` block.
pub fn recipe_to_dsl(r: &Recipe) -> String {
    let mut out = format!("recipe {}\n", quote(&r.title));
    write_body(&mut out, r, None, "");
    for b in &r.branches {
        let _ = write!(out, "alt {}", b.id);
        if let Some(g) = &b.guard {
            let _ = write!(out, " {}", quote(g));
        }
        out.push_str(" {\n");
        write_body(&mut out, r, Some(&b.id), "  ");
        out.push_str("}\n");
    }
    out
}

pub fn knowledge_to_dsl(k: &KnowledgeDoc) -> String {
    let mut text = recipe_to_dsl(&k.recipe);
    text.replace_range(..("recipe".len()), "knowledge");
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let extra = k
        .removes
        .iter()
        .map(|r| format!("remove {r}"))
        .chain(k.anchors.iter().map(|a| format!("anchor {a}")));
    for (n, line) in extra.enumerate() {
        lines.insert(1 + n, line);
    }
    lines.join("\n") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"recipe "toast"
# bread first
prelim slice "Slice the bread"
step toast "Toast it" for 2-3 min until "golden"
step butter "Butter it" meanwhile
alt jam "if sweet" {
  step spread "Spread jam"
  rel spread {bi,mi} butter
}
"#;

    #[test]
    fn parses_small_recipe() {
        let r = parse_recipe_dsl(SMALL).unwrap();
        assert_eq!(r.title, "toast");
        assert_eq!(r.actions.len(), 4);
        assert_eq!(r.states.len(), 1);
        assert_eq!(r.states[0].id, "golden");
        assert_eq!(r.branches[0].guard.as_deref(), Some("if sweet"));
        assert_eq!(r.action("spread").unwrap().branch.as_deref(), Some("jam"));
        let slice = r.action("slice").unwrap();
        assert_eq!(&SMALL[slice.span.start..slice.span.end], "prelim slice \"Slice the bread\"");
    }

    #[test]
    fn round_trip_is_stable() {
        let r = parse_recipe_dsl(SMALL).unwrap();
        let once = recipe_to_dsl(&r);
        let twice = recipe_to_dsl(&parse_recipe_dsl(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn empty_input_has_no_header() {
        let e = parse_recipe_dsl("").unwrap_err();
        assert!(e.to_string().contains("no recipe header"), "{e}");
        assert!(parse_recipe_dsl("# only a comment\n").is_err());
    }

    #[test]
    fn meanwhile_first_step_is_an_error() {
        let e = parse_recipe_dsl("recipe \"x\"\nstep s1 \"x\" meanwhile\n").unwrap_err();
        assert!(matches!(e, AnnotationError::Syntax { line: 2, .. }), "{e}");
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        for (text, line) in [
            ("recipe \"x\"\nstep a \"x\" for soon\n", 2),
            ("recipe \"x\"\n\nfrobnicate\n", 3),
            ("recipe \"x\"\nrel a b c\n", 2),
            ("recipe \"x\"\nstep a \"unterminated\n", 2),
            ("recipe \"x\"\n}\n", 2),
        ] {
            match parse_recipe_dsl(text) {
                Err(AnnotationError::Syntax { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn reference_errors() {
        let dup = parse_recipe_dsl("recipe \"x\"\nstep a \"x\"\nstep a \"y\"\n").unwrap_err();
        assert!(dup.to_string().contains("duplicate id `a`"), "{dup}");
        let unknown = parse_recipe_dsl("recipe \"x\"\nstep a \"x\"\nrel a {b} ghost\n").unwrap_err();
        assert!(unknown.to_string().contains("unknown id `ghost`"), "{unknown}");
    }

    #[test]
    fn knowledge_anchors_resolve_externally() {
        let k = parse_knowledge("knowledge \"k\"\nremove beans\nanchor combine\nstep cook \"Cook\" for 30 min\nrel cook {b} combine\n")
            .unwrap();
        assert_eq!(k.name, "k");
        assert_eq!(k.anchors, ["combine"]);
        assert_eq!(k.removes, ["beans"]);
        let again = parse_knowledge(&knowledge_to_dsl(&k)).unwrap();
        assert_eq!(knowledge_to_dsl(&again), knowledge_to_dsl(&k));
        assert!(parse_recipe_dsl("recipe \"x\"\nanchor a\n").is_err());
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("mixture is well coated"), "mixture_is_well_coated");
        assert_eq!(slug("  Lightly-brown! "), "lightly_brown");
    }
}
