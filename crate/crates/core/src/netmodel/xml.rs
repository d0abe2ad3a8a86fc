//! Network XML format.
//!
//! ```xml
//! <network>
//!   <junction id="J1" x="0" y="0"/>
//!   <road id="in" from="EXTERNAL" to="J1" length="100" spawn_rate="0.1"/>
//!   <lane id="in_0" road="in"/>
//!   <trajectory id="t1" junction="J1" in="in_0" out="out_0" length="12"/>
//!   <conflict a="t1" b="t2"/>
//!   <track id="1" in="in_0" trajectory="t1" out="out_0"/>
//! </network>
//! ```
//!
//! Unknown elements and unknown attributes are rejected.

use std::borrow::Cow;
use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use super::validate::{conflict_key, validate_network, Violation};
use super::{ConflictPair, Endpoint, Junction, Lane, Road, RoadNetwork, Track, Trajectory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("unknown element <{0}>")]
    UnknownElement(String),
    #[error("<{element}>: invalid attribute `{name}`: {reason}")]
    InvalidAttribute {
        element: String,
        name: String,
        reason: String,
    },
    #[error("unknown reference `{0}`")]
    UnknownReference(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("road `{0}` has no lane")]
    MissingLane(String),
    #[error("{0}")]
    Structural(Violation),
}

/// First failure found while reading a network document, with its 1-based line.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

struct LineIndex {
    newlines: Vec<usize>,
}

impl LineIndex {
    fn new(doc: &str) -> Self {
        Self {
            newlines: doc.match_indices('\n').map(|(i, _)| i).collect(),
        }
    }

    /// Line containing the byte just before `offset`.
    fn line_at(&self, offset: usize) -> usize {
        let pos = offset.saturating_sub(1);
        self.newlines.partition_point(|&nl| nl < pos) + 1
    }
}

struct Attrs<'a> {
    element: String,
    values: Vec<(String, Cow<'a, str>)>,
}

impl<'a> Attrs<'a> {
    fn read(e: &'a BytesStart<'a>) -> Result<Self, ParseErrorKind> {
        let element = String::from_utf8_lossy(e.name().as_ref()).into_owned();
        let mut values = Vec::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| ParseErrorKind::MalformedXml(err.to_string()))?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| ParseErrorKind::MalformedXml(err.to_string()))?;
            values.push((key, value));
        }
        Ok(Self { element, values })
    }

    fn invalid(&self, name: &str, reason: impl Into<String>) -> ParseErrorKind {
        ParseErrorKind::InvalidAttribute {
            element: self.element.clone(),
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    fn take_opt(&mut self, name: &str) -> Option<String> {
        let idx = self.values.iter().position(|(k, _)| k == name)?;
        Some(self.values.remove(idx).1.into_owned())
    }

    fn take(&mut self, name: &str) -> Result<String, ParseErrorKind> {
        self.take_opt(name)
            .ok_or_else(|| self.invalid(name, "missing"))
    }

    fn take_f64(&mut self, name: &str) -> Result<f64, ParseErrorKind> {
        let raw = self.take(name)?;
        self.number(name, &raw)
    }

    fn number(&self, name: &str, raw: &str) -> Result<f64, ParseErrorKind> {
        match raw.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.invalid(name, format!("`{raw}` is not a finite number"))),
        }
    }

    fn finish(self) -> Result<(), ParseErrorKind> {
        match self.values.first() {
            None => Ok(()),
            Some((k, _)) => Err(self.invalid(k, "unknown attribute")),
        }
    }
}

#[derive(Default)]
struct Builder {
    net: RoadNetwork,
    seen: HashMap<&'static str, HashSet<String>>,
    lines: HashMap<(&'static str, String), usize>,
}

impl Builder {
    fn register(
        &mut self,
        kind: &'static str,
        key: String,
        line: usize,
    ) -> Result<(), ParseErrorKind> {
        if kind != "conflict" && !self.seen.entry(kind).or_default().insert(key.clone()) {
            return Err(ParseErrorKind::DuplicateId(key));
        }
        self.lines.entry((kind, key)).or_insert(line);
        Ok(())
    }

    fn element(&mut self, e: &BytesStart<'_>, line: usize) -> Result<(), ParseErrorKind> {
        let mut a = Attrs::read(e)?;
        match a.element.as_str() {
            "junction" => {
                let id = a.take("id")?;
                let x = a.take_f64("x")?;
                let y = a.take_f64("y")?;
                a.finish()?;
                self.register("junction", id.clone(), line)?;
                self.net.junctions.push(Junction { id, x, y });
            }
            "road" => {
                let id = a.take("id")?;
                let from = Endpoint::parse(&a.take("from")?);
                let to = Endpoint::parse(&a.take("to")?);
                let length = a.take_f64("length")?;
                let spawn_rate = match a.take_opt("spawn_rate") {
                    Some(raw) => a.number("spawn_rate", &raw)?,
                    None => 0.0,
                };
                a.finish()?;
                self.register("road", id.clone(), line)?;
                self.net.roads.push(Road {
                    id,
                    from,
                    to,
                    length,
                    spawn_rate,
                });
            }
            "lane" => {
                let id = a.take("id")?;
                let road = a.take("road")?;
                a.finish()?;
                self.register("lane", id.clone(), line)?;
                self.net.lanes.push(Lane { id, road });
            }
            "trajectory" => {
                let id = a.take("id")?;
                let junction = a.take("junction")?;
                let in_lane = a.take("in")?;
                let out_lane = a.take("out")?;
                let length = a.take_f64("length")?;
                a.finish()?;
                self.register("trajectory", id.clone(), line)?;
                self.net.trajectories.push(Trajectory {
                    id,
                    junction,
                    in_lane,
                    out_lane,
                    length,
                });
            }
            "conflict" => {
                let ca = a.take("a")?;
                let cb = a.take("b")?;
                a.finish()?;
                self.register("conflict", conflict_key(&ca, &cb), line)?;
                self.net.conflicts.push(ConflictPair { a: ca, b: cb });
            }
            "track" => {
                let raw = a.take("id")?;
                let id = raw
                    .trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| a.invalid("id", format!("`{raw}` is not a positive integer")))?;
                let in_lane = a.take("in")?;
                let trajectory = a.take("trajectory")?;
                let out_lane = a.take("out")?;
                a.finish()?;
                self.register("track", id.to_string(), line)?;
                self.net.tracks.push(Track {
                    id,
                    in_lane,
                    trajectory,
                    out_lane,
                });
            }
            other => return Err(ParseErrorKind::UnknownElement(other.to_string())),
        }
        Ok(())
    }
}

fn violation_kind(v: Violation) -> ParseErrorKind {
    match v {
        Violation::DuplicateId { id, .. } => ParseErrorKind::DuplicateId(id),
        Violation::UnknownReference { reference, .. } => {
            ParseErrorKind::UnknownReference(reference)
        }
        Violation::MissingLane { road } => ParseErrorKind::MissingLane(road),
        Violation::InvalidAttribute {
            kind,
            attribute,
            reason,
            ..
        } => ParseErrorKind::InvalidAttribute {
            element: kind.to_string(),
            name: attribute.to_string(),
            reason,
        },
        other => ParseErrorKind::Structural(other),
    }
}

/// Parses and validates a network document. Never panics on malformed input.
pub fn parse_network(document: &str) -> Result<RoadNetwork, ParseError> {
    let lines = LineIndex::new(document);
    let mut reader = Reader::from_str(document);
    reader.config_mut().trim_text(true);

    let mut builder = Builder::default();
    let mut root_seen = false;
    let mut root_closed = false;
    // Name of a child element opened with a start tag and not yet closed.
    let mut open_child: Option<Vec<u8>> = None;

    loop {
        let event = reader.read_event();
        let line = lines.line_at(reader.buffer_position() as usize);
        let fail = |kind| ParseError { line, kind };
        let event = event.map_err(|e| fail(ParseErrorKind::MalformedXml(e.to_string())))?;
        match event {
            Event::Eof => break,
            Event::Decl(_) | Event::Comment(_) | Event::DocType(_) | Event::PI(_) => {}
            Event::Text(t) => {
                if !t.as_ref().iter().all(u8::is_ascii_whitespace) {
                    return Err(fail(ParseErrorKind::MalformedXml(
                        "unexpected text content".into(),
                    )));
                }
            }
            Event::CData(_) => {
                return Err(fail(ParseErrorKind::MalformedXml(
                    "unexpected CDATA".into(),
                )));
            }
            Event::Start(e) if !root_seen => {
                check_root(&e).map_err(fail)?;
                root_seen = true;
            }
            Event::Empty(e) if !root_seen => {
                check_root(&e).map_err(fail)?;
                root_seen = true;
                root_closed = true;
            }
            Event::Start(_) | Event::Empty(_) if root_closed => {
                return Err(fail(ParseErrorKind::MalformedXml(
                    "content after </network>".into(),
                )));
            }
            Event::Start(e) => {
                if open_child.is_some() {
                    return Err(fail(ParseErrorKind::MalformedXml("nested element".into())));
                }
                builder.element(&e, line).map_err(fail)?;
                open_child = Some(e.name().as_ref().to_vec());
            }
            Event::Empty(e) => {
                if open_child.is_some() {
                    return Err(fail(ParseErrorKind::MalformedXml("nested element".into())));
                }
                builder.element(&e, line).map_err(fail)?;
            }
            Event::End(e) => match open_child.take() {
                Some(name) if name == e.name().as_ref() => {}
                Some(_) => {
                    return Err(fail(ParseErrorKind::MalformedXml(
                        "mismatched end tag".into(),
                    )));
                }
                None if e.name().as_ref() == b"network" && root_seen && !root_closed => {
                    root_closed = true;
                }
                None => {
                    return Err(fail(ParseErrorKind::MalformedXml(
                        "unexpected end tag".into(),
                    )));
                }
            },
        }
    }

    let eof_line = lines.line_at(document.len());
    if !root_seen {
        return Err(ParseError {
            line: eof_line,
            kind: ParseErrorKind::MalformedXml("missing <network> root element".into()),
        });
    }
    if !root_closed {
        return Err(ParseError {
            line: eof_line,
            kind: ParseErrorKind::MalformedXml("unclosed <network> element".into()),
        });
    }

    let Builder {
        net,
        lines: element_lines,
        ..
    } = builder;
    if let Some(v) = validate_network(&net).into_iter().next() {
        let line = element_lines.get(&v.subject()).copied().unwrap_or(1);
        return Err(ParseError {
            line,
            kind: violation_kind(v),
        });
    }
    Ok(net)
}

fn check_root(e: &BytesStart<'_>) -> Result<(), ParseErrorKind> {
    if e.name().as_ref() != b"network" {
        let name = String::from_utf8_lossy(e.name().as_ref()).into_owned();
        return Err(ParseErrorKind::UnknownElement(name));
    }
    if e.attributes().next().is_some() {
        return Err(ParseErrorKind::InvalidAttribute {
            element: "network".into(),
            name: "*".into(),
            reason: "<network> takes no attributes".into(),
        });
    }
    Ok(())
}

fn attr(out: &mut String, name: &str, value: &str) {
    let _ = write!(out, " {name}=\"{}\"", escape(value));
}

/// Canonical XML form. Byte-identical for equal networks.
pub fn serialize_network(net: &RoadNetwork) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<network>\n");
    let mut element = |name: &str, attrs: &[(&str, String)]| {
        out.push_str("  <");
        out.push_str(name);
        for (k, v) in attrs {
            attr(&mut out, k, v);
        }
        out.push_str("/>\n");
    };
    for j in &net.junctions {
        element(
            "junction",
            &[
                ("id", j.id.clone()),
                ("x", j.x.to_string()),
                ("y", j.y.to_string()),
            ],
        );
    }
    for r in &net.roads {
        let mut attrs = vec![
            ("id", r.id.clone()),
            ("from", r.from.as_str().to_string()),
            ("to", r.to.as_str().to_string()),
            ("length", r.length.to_string()),
        ];
        if r.spawn_rate != 0.0 {
            attrs.push(("spawn_rate", r.spawn_rate.to_string()));
        }
        element("road", &attrs);
    }
    for l in &net.lanes {
        element("lane", &[("id", l.id.clone()), ("road", l.road.clone())]);
    }
    for t in &net.trajectories {
        element(
            "trajectory",
            &[
                ("id", t.id.clone()),
                ("junction", t.junction.clone()),
                ("in", t.in_lane.clone()),
                ("out", t.out_lane.clone()),
                ("length", t.length.to_string()),
            ],
        );
    }
    for c in &net.conflicts {
        element("conflict", &[("a", c.a.clone()), ("b", c.b.clone())]);
    }
    for t in &net.tracks {
        element(
            "track",
            &[
                ("id", t.id.to_string()),
                ("in", t.in_lane.clone()),
                ("trajectory", t.trajectory.clone()),
                ("out", t.out_lane.clone()),
            ],
        );
    }
    out.push_str("</network>\n");
    out
}
