//! TimeML subset reader: EVENT, MAKEINSTANCE, SIGNAL, TLINK, and TIMEX3
//! limited to DURATION and SET values.

use std::collections::{BTreeMap, BTreeSet};

use super::AnnotationError;
use crate::allen::{BaseRelation, Qcn, Relation};
use crate::metric::{BoundWindow, HybridNetwork, Minutes};
use crate::recipe::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub eid: String,
    pub class: String,
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub eiid: String,
    pub event_id: String,
    pub tense: Option<String>,
    pub aspect: Option<String>,
    pub pos: Option<String>,
    pub cardinality: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signal {
    pub sid: String,
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TimexKind {
    Duration(Minutes),
    /// A set of recurring times; `value` kept verbatim.
    Set,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Timex {
    pub tid: String,
    pub kind: TimexKind,
    pub value: String,
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LinkEnd {
    Instance(String),
    Time(String),
}

impl LinkEnd {
    pub fn id(&self) -> &str {
        match self {
            LinkEnd::Instance(s) | LinkEnd::Time(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tlink {
    pub lid: Option<String>,
    pub source: LinkEnd,
    pub signal: Option<String>,
    pub target: LinkEnd,
    pub rel_type: String,
    /// Byte offset of the tag in the markup.
    pub offset: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnotatedDoc {
    /// Tag-free text; all spans index into it.
    pub text: String,
    pub events: Vec<Event>,
    pub instances: Vec<Instance>,
    pub signals: Vec<Signal>,
    pub timexes: Vec<Timex>,
    pub tlinks: Vec<Tlink>,
}

impl AnnotatedDoc {
    pub fn instance(&self, eiid: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.eiid == eiid)
    }

    pub fn timex(&self, tid: &str) -> Option<&Timex> {
        self.timexes.iter().find(|t| t.tid == tid)
    }

    /// Interval name for an instance: the event id when the event has a
    /// single instance, the instance id otherwise.
    pub fn interval_name(&self, eiid: &str) -> String {
        match self.instance(eiid) {
            Some(i) if self.instances.iter().filter(|j| j.event_id == i.event_id).count() == 1 => {
                i.event_id.clone()
            }
            _ => eiid.to_string(),
        }
    }
}

fn offset_err(offset: usize, message: impl Into<String>) -> AnnotationError {
    AnnotationError::Markup {
        offset,
        message: message.into(),
    }
}

fn decode_entities(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

struct Tag {
    name: String,
    closing: bool,
    self_closing: bool,
    attrs: BTreeMap<String, String>,
}

fn parse_tag(body: &str, offset: usize) -> Result<Tag, AnnotationError> {
    let (closing, body) = match body.strip_prefix('/') {
        Some(b) => (true, b),
        None => (false, body),
    };
    let (self_closing, body) = match body.strip_suffix('/') {
        Some(b) => (true, b),
        None => (false, body),
    };
    let body = body.trim();
    let name_end = body.find(char::is_whitespace).unwrap_or(body.len());
    let name = body[..name_end].to_string();
    let mut attrs = BTreeMap::new();
    let mut rest = body[name_end..].trim_start();
    while !rest.is_empty() {
        let eq = rest
            .find('=')
            .ok_or_else(|| offset_err(offset, format!("malformed attribute in <{name}>")))?;
        let key = rest[..eq].trim().to_string();
        let after = rest[eq + 1..].trim_start();
        let quote = after
            .chars()
            .next()
            .filter(|&c| c == '"' || c == '\'')
            .ok_or_else(|| offset_err(offset, format!("unquoted attribute `{key}`")))?;
        let close = after[1..]
            .find(quote)
            .ok_or_else(|| offset_err(offset, format!("unterminated attribute `{key}`")))?;
        let value = decode_entities(&after[1..1 + close]);
        if attrs.insert(key.clone(), value).is_some() {
            return Err(offset_err(offset, format!("repeated attribute `{key}`")));
        }
        rest = after[close + 2..].trim_start();
    }
    Ok(Tag {
        name,
        closing,
        self_closing,
        attrs,
    })
}

/// Parses an ISO 8601 duration (`PT1H`, `PT15M`, `P1DT2H`, `PT1.5H`) into
/// minutes.
pub fn parse_iso_duration(value: &str) -> Option<Minutes> {
    let body = value.strip_prefix('P')?;
    let mut total = Minutes::from_integer(0);
    let mut in_time = false;
    let mut num = String::new();
    let mut any = false;
    for c in body.chars() {
        match c {
            'T' if !in_time && num.is_empty() => in_time = true,
            '0'..='9' | '.' => num.push(c),
            unit => {
                let scale: i64 = match (in_time, unit) {
                    (false, 'W') => 7 * 24 * 60,
                    (false, 'D') => 24 * 60,
                    (true, 'H') => 60,
                    (true, 'M') => 1,
                    (true, 'S') => {
                        let v = decimal(&num)?;
                        total += v / 60;
                        num.clear();
                        any = true;
                        continue;
                    }
                    _ => return None,
                };
                total += decimal(&num)? * scale;
                num.clear();
                any = true;
            }
        }
    }
    (any && num.is_empty()).then_some(total)
}

fn decimal(s: &str) -> Option<Minutes> {
    let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    let scale = 10i64.checked_pow(frac.len() as u32)?;
    let whole: i64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
    let frac: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    Some(Minutes::new(whole.checked_mul(scale)?.checked_add(frac)?, scale))
}

enum Open {
    Event(String, String, usize),
    Signal(String, usize),
    Timex(String, TimexKind, String, usize),
}

fn required(tag: &Tag, key: &str, offset: usize) -> Result<String, AnnotationError> {
    tag.attrs
        .get(key)
        .cloned()
        .ok_or_else(|| offset_err(offset, format!("<{}> is missing `{key}`", tag.name)))
}

/// Parses TimeML-subset markup. Spans index the tag-free text.
pub fn parse_timeml(markup: &str) -> Result<AnnotatedDoc, AnnotationError> {
    let mut doc = AnnotatedDoc::default();
    let mut open: Option<Open> = None;
    let mut refs: Vec<(usize, &'static str, String)> = Vec::new();
    let mut pos = 0;
    while pos < markup.len() {
        let Some(lt) = markup[pos..].find('<').map(|k| pos + k) else {
            doc.text.push_str(&decode_entities(&markup[pos..]));
            break;
        };
        doc.text.push_str(&decode_entities(&markup[pos..lt]));
        let gt = markup[lt..]
            .find('>')
            .map(|k| lt + k)
            .ok_or_else(|| offset_err(lt, "unterminated tag"))?;
        pos = gt + 1;
        let body = &markup[lt + 1..gt];
        if body.starts_with('?') || body.starts_with('!') {
            continue;
        }
        let tag = parse_tag(body, lt)?;
        let here = doc.text.len();
        match (tag.name.as_str(), tag.closing) {
            ("EVENT" | "SIGNAL" | "TIMEX3", false) => {
                if open.is_some() {
                    return Err(offset_err(lt, format!("<{}> inside another annotation", tag.name)));
                }
                if tag.self_closing {
                    return Err(offset_err(lt, format!("<{}> must enclose text", tag.name)));
                }
                open = Some(match tag.name.as_str() {
                    "EVENT" => Open::Event(
                        required(&tag, "eid", lt)?,
                        tag.attrs.get("class").cloned().unwrap_or_default(),
                        here,
                    ),
                    "SIGNAL" => Open::Signal(required(&tag, "sid", lt)?, here),
                    _ => {
                        let tid = required(&tag, "tid", lt)?;
                        let value = required(&tag, "value", lt)?;
                        let kind = match required(&tag, "type", lt)?.as_str() {
                            "DURATION" => TimexKind::Duration(
                                parse_iso_duration(&value)
                                    .filter(|v| *v > Minutes::from_integer(0))
                                    .ok_or_else(|| offset_err(lt, format!("unsupported duration `{value}`")))?,
                            ),
                            "SET" => TimexKind::Set,
                            other => {
                                return Err(offset_err(lt, format!("unsupported TIMEX3 type `{other}`")));
                            }
                        };
                        Open::Timex(tid, kind, value, here)
                    }
                });
            }
            (name @ ("EVENT" | "SIGNAL" | "TIMEX3"), true) => {
                let span = |start: usize| Span::new(start, here);
                match (name, open.take()) {
                    ("EVENT", Some(Open::Event(eid, class, start))) => doc.events.push(Event {
                        eid,
                        class,
                        text: doc.text[start..here].to_string(),
                        span: span(start),
                    }),
                    ("SIGNAL", Some(Open::Signal(sid, start))) => doc.signals.push(Signal {
                        sid,
                        text: doc.text[start..here].to_string(),
                        span: span(start),
                    }),
                    ("TIMEX3", Some(Open::Timex(tid, kind, value, start))) => doc.timexes.push(Timex {
                        tid,
                        kind,
                        value,
                        text: doc.text[start..here].to_string(),
                        span: span(start),
                    }),
                    _ => return Err(offset_err(lt, format!("unmatched </{name}>"))),
                }
            }
            ("MAKEINSTANCE", false) => {
                let eiid = required(&tag, "eiid", lt)?;
                let event_id = required(&tag, "eventID", lt)?;
                refs.push((lt, "event", event_id.clone()));
                doc.instances.push(Instance {
                    eiid,
                    event_id,
                    tense: tag.attrs.get("tense").cloned(),
                    aspect: tag.attrs.get("aspect").cloned(),
                    pos: tag.attrs.get("pos").cloned(),
                    cardinality: tag.attrs.get("cardinality").cloned(),
                });
            }
            ("TLINK", false) => {
                let end = |keys: &[(&str, bool)]| -> Result<LinkEnd, AnnotationError> {
                    let found: Vec<LinkEnd> = keys
                        .iter()
                        .filter_map(|&(k, is_time)| {
                            tag.attrs.get(k).map(|v| {
                                if is_time {
                                    LinkEnd::Time(v.clone())
                                } else {
                                    LinkEnd::Instance(v.clone())
                                }
                            })
                        })
                        .collect();
                    match found.as_slice() {
                        [one] => Ok(one.clone()),
                        [] => Err(offset_err(lt, format!("<TLINK> is missing `{}`", keys[0].0))),
                        _ => Err(offset_err(lt, "<TLINK> has more than one link end on a side")),
                    }
                };
                let source = end(&[("eventInstanceID", false), ("timeID", true)])?;
                let target = end(&[
                    ("relatedToEvent", false),
                    ("relatedToEventInstance", false),
                    ("relatedToTime", true),
                ])?;
                let signal = tag.attrs.get("signalID").cloned();
                doc.tlinks.push(Tlink {
                    lid: tag.attrs.get("lid").cloned(),
                    source,
                    signal,
                    target,
                    rel_type: required(&tag, "relType", lt)?,
                    offset: lt,
                });
            }
            ("MAKEINSTANCE" | "TLINK", true) => {}
            (other, _) => return Err(offset_err(lt, format!("unknown tag <{other}>"))),
        }
    }
    if open.is_some() {
        return Err(offset_err(markup.len(), "unclosed annotation at end of input"));
    }
    check_ids(&doc, &refs)?;
    Ok(doc)
}

fn check_ids(doc: &AnnotatedDoc, refs: &[(usize, &'static str, String)]) -> Result<(), AnnotationError> {
    let unique = |ids: Vec<&str>, what: &str| -> Result<(), AnnotationError> {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(id) {
                return Err(offset_err(0, format!("duplicate {what} `{id}`")));
            }
        }
        Ok(())
    };
    unique(doc.events.iter().map(|e| e.eid.as_str()).collect(), "eid")?;
    unique(doc.instances.iter().map(|i| i.eiid.as_str()).collect(), "eiid")?;
    unique(doc.signals.iter().map(|s| s.sid.as_str()).collect(), "sid")?;
    unique(doc.timexes.iter().map(|t| t.tid.as_str()).collect(), "tid")?;
    for (offset, _, eid) in refs {
        if !doc.events.iter().any(|e| &e.eid == eid) {
            return Err(offset_err(*offset, format!("MAKEINSTANCE refers to unknown event `{eid}`")));
        }
    }
    for l in &doc.tlinks {
        for end in [&l.source, &l.target] {
            let ok = match end {
                LinkEnd::Instance(id) => doc.instance(id).is_some(),
                LinkEnd::Time(id) => doc.timex(id).is_some(),
            };
            if !ok {
                return Err(offset_err(l.offset, format!("TLINK refers to unknown id `{}`", end.id())));
            }
        }
        if let Some(s) = &l.signal {
            if !doc.signals.iter().any(|x| &x.sid == s) {
                return Err(offset_err(l.offset, format!("TLINK refers to unknown signal `{s}`")));
            }
        }
    }
    Ok(())
}

/// TLINK relType names to Allen relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelTypeMap(pub BTreeMap<String, Relation>);

impl Default for RelTypeMap {
    fn default() -> Self {
        use BaseRelation::*;
        let pairs = [
            ("BEFORE", Before),
            ("AFTER", After),
            ("IBEFORE", Meets),
            ("IAFTER", MetBy),
            ("INCLUDES", Contains),
            ("IS_INCLUDED", During),
            ("SIMULTANEOUS", Equals),
            ("IDENTITY", Equals),
            ("BEGINS", Starts),
            ("BEGUN_BY", StartedBy),
            ("ENDS", Finishes),
            ("ENDED_BY", FinishedBy),
        ];
        RelTypeMap(
            pairs
                .into_iter()
                .map(|(k, a)| (k.to_string(), Relation::atom(a)))
                .collect(),
        )
    }
}

impl RelTypeMap {
    pub fn get(&self, rel_type: &str) -> Option<Relation> {
        self.0.get(rel_type).copied().filter(|r| !r.is_empty())
    }
}

fn end_name(doc: &AnnotatedDoc, end: &LinkEnd) -> String {
    match end {
        LinkEnd::Instance(eiid) => doc.interval_name(eiid),
        LinkEnd::Time(tid) => tid.clone(),
    }
}

fn is_set(doc: &AnnotatedDoc, end: &LinkEnd) -> bool {
    matches!(end, LinkEnd::Time(t) if doc.timex(t).is_some_and(|x| x.kind == TimexKind::Set))
}

/// Interval names in document order: instances, then duration timexes.
fn interval_names(doc: &AnnotatedDoc) -> Vec<String> {
    doc.instances
        .iter()
        .map(|i| doc.interval_name(&i.eiid))
        .chain(
            doc.timexes
                .iter()
                .filter(|t| matches!(t.kind, TimexKind::Duration(_)))
                .map(|t| t.tid.clone()),
        )
        .collect()
}

/// One interval per event instance (and per DURATION timex); each TLINK
/// `a relType b` intersects `C[a][b]` with the mapped relation. Links to SET
/// timexes carry no interval constraint.
pub fn doc_to_qcn(doc: &AnnotatedDoc, map: &RelTypeMap) -> Result<Qcn, AnnotationError> {
    let mut qcn = Qcn::new(interval_names(doc)).map_err(|e| offset_err(0, e.to_string()))?;
    for l in &doc.tlinks {
        if is_set(doc, &l.source) || is_set(doc, &l.target) {
            continue;
        }
        let r = map
            .get(&l.rel_type)
            .ok_or_else(|| offset_err(l.offset, format!("unmapped relType `{}`", l.rel_type)))?;
        qcn.constrain_named(&end_name(doc, &l.source), &end_name(doc, &l.target), r)
            .map_err(|e| offset_err(l.offset, e.to_string()))?;
    }
    Ok(qcn)
}

/// An event instance linked to a SET timex: it recurs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recurrence {
    pub interval: String,
    pub set: String,
    pub rel_type: String,
}

/// `doc_to_qcn` plus fixed lengths for DURATION timexes. Also returns the
/// recurrences expressed through SET timexes.
pub fn doc_to_hybrid(doc: &AnnotatedDoc, map: &RelTypeMap) -> Result<(HybridNetwork, Vec<Recurrence>), AnnotationError> {
    let qcn = doc_to_qcn(doc, map)?;
    let mut net = HybridNetwork::new();
    let err = |e: crate::metric::MetricError| offset_err(0, e.to_string());
    for name in qcn.names() {
        net.add_interval(name).map_err(err)?;
    }
    for (i, j) in qcn.pairs() {
        let r = qcn.get(i, j);
        if !r.is_full() {
            net.constrain_allen(&qcn.names()[i], &qcn.names()[j], r).map_err(err)?;
        }
    }
    for t in &doc.timexes {
        if let TimexKind::Duration(v) = t.kind {
            net.constrain_duration(&t.tid, BoundWindow::exact(v)).map_err(err)?;
        }
    }
    let mut recurrences = Vec::new();
    for l in &doc.tlinks {
        let (inst, set) = match (&l.source, &l.target) {
            (LinkEnd::Instance(_), s) if is_set(doc, s) => (&l.source, s),
            (s, LinkEnd::Instance(_)) if is_set(doc, s) => (&l.target, s),
            _ => continue,
        };
        recurrences.push(Recurrence {
            interval: end_name(doc, inst),
            set: set.id().to_string(),
            rel_type: l.rel_type.clone(),
        });
    }
    Ok((net, recurrences))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SNIPPET: &str = r#"<EVENT eid="e1" class="OCCURENCE"> Brown </EVENT>
<MAKEINSTANCE eiid="ei1" eventID="e1" tense="INFINITIVE"
aspect="NONE" pos="VERB"/> hamburger and sausage with onion, garlic,
and all seasonings. <SIGNAL sid="s1"> Meanwhile </SIGNAL>, <EVENT
eid="e2" class="OCCURENCE"> prepare </EVENT> <MAKEINSTANCE
eiid="ei2" eventID="e2" tense="INFINITIVE" aspect="NONE"
pos="VERB"/> the pasta per pkg instructions. <TLINK
eventInstanceID="ei2" signalID="s1" relatedToEvent="ei1"
relType="IS_INCLUDED"/>
"#;

    #[test]
    fn snippet_parses() {
        let d = parse_timeml(SNIPPET).unwrap();
        assert_eq!((d.events.len(), d.instances.len(), d.signals.len(), d.tlinks.len()), (2, 2, 1, 1));
        let l = &d.tlinks[0];
        assert_eq!(l.source, LinkEnd::Instance("ei2".into()));
        assert_eq!(l.signal.as_deref(), Some("s1"));
        assert_eq!(l.target, LinkEnd::Instance("ei1".into()));
        assert_eq!(l.rel_type, "IS_INCLUDED");
        for e in &d.events {
            assert_eq!(&d.text[e.span.start..e.span.end], e.text);
        }
        assert_eq!(d.events[0].text.trim(), "Brown");
        assert_eq!(d.signals[0].text.trim(), "Meanwhile");
    }

    #[test]
    fn snippet_qcn() {
        let d = parse_timeml(SNIPPET).unwrap();
        let q = doc_to_qcn(&d, &RelTypeMap::default()).unwrap();
        assert_eq!(q.relation("e1", "e2").unwrap(), Relation::atom(BaseRelation::Contains));
        assert!(q.close().is_consistent());
    }

    #[test]
    fn plain_text_is_empty_doc() {
        let d = parse_timeml("just words").unwrap();
        assert_eq!(d.text, "just words");
        assert!(d.events.is_empty() && d.tlinks.is_empty());
        assert_eq!(doc_to_qcn(&d, &RelTypeMap::default()).unwrap().len(), 0);
    }

    #[test]
    fn errors_report_offsets() {
        let dangling = "<EVENT eid=\"e1\">x</EVENT><MAKEINSTANCE eiid=\"ei1\" eventID=\"e1\"/><TLINK eventInstanceID=\"ei1\" relatedToEvent=\"ei9\" relType=\"BEFORE\"/>";
        match parse_timeml(dangling) {
            Err(AnnotationError::Markup { offset, .. }) => assert_eq!(offset, dangling.find("<TLINK").unwrap()),
            other => panic!("{other:?}"),
        }
        match parse_timeml("ab<ALINK lid=\"l1\"/>") {
            Err(AnnotationError::Markup { offset: 2, message }) => assert!(message.contains("ALINK")),
            other => panic!("{other:?}"),
        }
        assert!(parse_timeml("<EVENT class=\"x\">y</EVENT>").is_err());
        assert!(parse_timeml("<TIMEX3 tid=\"t1\" type=\"DATE\" value=\"2010\">x</TIMEX3>").is_err());
    }

    #[test]
    fn contradictory_links_close_inconsistent() {
        let m = "<EVENT eid=\"e1\">a</EVENT><MAKEINSTANCE eiid=\"ei1\" eventID=\"e1\"/>\
                 <EVENT eid=\"e2\">b</EVENT><MAKEINSTANCE eiid=\"ei2\" eventID=\"e2\"/>\
                 <EVENT eid=\"e3\">c</EVENT><MAKEINSTANCE eiid=\"ei3\" eventID=\"e3\"/>\
                 <TLINK eventInstanceID=\"ei1\" relatedToEvent=\"ei2\" relType=\"BEFORE\"/>\
                 <TLINK eventInstanceID=\"ei2\" relatedToEvent=\"ei3\" relType=\"BEFORE\"/>\
                 <TLINK eventInstanceID=\"ei3\" relatedToEvent=\"ei1\" relType=\"BEFORE\"/>";
        let q = doc_to_qcn(&parse_timeml(m).unwrap(), &RelTypeMap::default()).unwrap();
        assert!(!q.close().is_consistent());
    }

    #[test]
    fn unmapped_rel_type_errors() {
        let m = "<EVENT eid=\"e1\">a</EVENT><MAKEINSTANCE eiid=\"ei1\" eventID=\"e1\"/>\
                 <EVENT eid=\"e2\">b</EVENT><MAKEINSTANCE eiid=\"ei2\" eventID=\"e2\"/>\
                 <TLINK eventInstanceID=\"ei1\" relatedToEvent=\"ei2\" relType=\"DURING\"/>";
        let e = doc_to_qcn(&parse_timeml(m).unwrap(), &RelTypeMap::default()).unwrap_err();
        assert!(e.to_string().contains("DURING"));
    }

    #[test]
    fn iso_durations() {
        assert_eq!(parse_iso_duration("PT1H"), Some(Minutes::from_integer(60)));
        assert_eq!(parse_iso_duration("PT15M"), Some(Minutes::from_integer(15)));
        assert_eq!(parse_iso_duration("P1DT30S"), Some(Minutes::new(2881, 2)));
        assert_eq!(parse_iso_duration("PT1.5H"), Some(Minutes::from_integer(90)));
        assert_eq!(parse_iso_duration("1H"), None);
        assert_eq!(parse_iso_duration("PT"), None);
        assert_eq!(parse_iso_duration("P1H"), None);
    }

    #[test]
    fn duration_timex_fixes_length() {
        let m = "<EVENT eid=\"e1\">Bake</EVENT><MAKEINSTANCE eiid=\"ei1\" eventID=\"e1\"/> for \
                 <TIMEX3 tid=\"t1\" type=\"DURATION\" value=\"PT1H\">1hr</TIMEX3>\
                 <TLINK eventInstanceID=\"ei1\" relatedToTime=\"t1\" relType=\"SIMULTANEOUS\"/>";
        let (net, rec) = doc_to_hybrid(&parse_timeml(m).unwrap(), &RelTypeMap::default()).unwrap();
        assert!(rec.is_empty());
        let closed = net.close();
        let c = closed.closed().unwrap();
        assert_eq!(c.duration("e1").unwrap(), BoundWindow::exact(60));
    }
}
