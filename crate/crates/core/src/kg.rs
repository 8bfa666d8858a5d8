//! Minimal RDF data model and an in-memory triple store.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::vocab;

/// An RDF term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal(Literal),
    Blank(String),
}

/// A literal value. Language-tagged literals carry `xsd:string` as their datatype
/// and keep the tag as metadata.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub lexical: String,
    pub datatype: String,
    pub lang: Option<String>,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: vocab::XSD_STRING.to_string(),
            lang: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: datatype.into(),
            lang: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, tag: impl Into<String>) -> Self {
        Self {
            lexical: lexical.into(),
            datatype: vocab::XSD_STRING.to_string(),
            lang: Some(tag.into()),
        }
    }
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        let iri = iri.into();
        debug_assert!(is_valid_iri(&iri), "invalid IRI {iri:?}");
        Term::Iri(iri)
    }

    pub fn blank(id: impl Into<String>) -> Self {
        let id = id.into();
        debug_assert!(!id.is_empty());
        Term::Blank(id)
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::string(lexical))
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Term::Iri(_) | Term::Blank(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    /// Identifier used when a resource is referenced from a flat document.
    pub fn resource_id(&self) -> Option<String> {
        match self {
            Term::Iri(iri) => Some(iri.clone()),
            Term::Blank(id) => Some(format!("_:{id}")),
            Term::Literal(_) => None,
        }
    }
}

/// Checks the IRI invariants: non-empty, no whitespace or forbidden characters,
/// and an absolute scheme prefix.
pub fn is_valid_iri(iri: &str) -> bool {
    if iri.is_empty() {
        return false;
    }
    if iri
        .chars()
        .any(|c| c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
    {
        return false;
    }
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Blank(id) => write!(f, "_:{id}"),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                for c in lit.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c if (c as u32) < 0x20 => write!(f, "\\u{:04X}", c as u32)?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                if let Some(tag) = &lit.lang {
                    write!(f, "@{tag}")
                } else if lit.datatype != vocab::XSD_STRING {
                    write!(f, "^^<{}>", lit.datatype)
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// A single statement. The subject is an IRI or blank node, the predicate an IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        debug_assert!(subject.is_resource());
        Self {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

/// An insertion-ordered set of triples indexed by subject and by (subject, predicate).
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: Vec<Triple>,
    seen: HashSet<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    by_subject_predicate: HashMap<(Term, String), Vec<usize>>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.seen == other.seen
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a triple; returns `false` when it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.seen.contains(&triple) {
            return false;
        }
        let idx = self.triples.len();
        self.by_subject.entry(triple.subject.clone()).or_default().push(idx);
        self.by_subject_predicate
            .entry((triple.subject.clone(), triple.predicate.clone()))
            .or_default()
            .push(idx);
        self.seen.insert(triple.clone());
        self.triples.push(triple);
        true
    }

    pub fn extend(&mut self, other: &Graph) {
        for t in other.iter() {
            self.insert(t.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.seen.contains(triple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Objects of `(subject, predicate)` in insertion order.
    pub fn objects<'a>(&'a self, subject: &Term, predicate: &str) -> impl Iterator<Item = &'a Term> {
        self.by_subject_predicate
            .get(&(subject.clone(), predicate.to_string()))
            .into_iter()
            .flatten()
            .map(move |&i| &self.triples[i].object)
    }

    /// Triples with the given subject in insertion order.
    pub fn triples_of<'a>(&'a self, subject: &Term) -> impl Iterator<Item = &'a Triple> {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .map(move |&i| &self.triples[i])
    }

    pub fn has_outgoing(&self, subject: &Term) -> bool {
        self.by_subject.contains_key(subject)
    }

    /// IRIs typed with `type_iri`, sorted and de-duplicated. Blank nodes are never returned.
    pub fn instances_of_type(&self, type_iri: &str) -> Vec<String> {
        let mut out: Vec<String> = self
            .triples
            .iter()
            .filter(|t| t.predicate == vocab::RDF_TYPE && t.object.as_iri() == Some(type_iri))
            .filter_map(|t| t.subject.as_iri().map(str::to_string))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Follows `path` from `subject`, fanning out over multi-valued segments.
    /// Literals reached before the last segment end that branch.
    pub fn resolve_path(&self, subject: &Term, path: &PropertyPath) -> Vec<Term> {
        let mut frontier = vec![subject.clone()];
        for segment in path.segments() {
            let mut next = Vec::new();
            for node in frontier.iter().filter(|n| n.is_resource()) {
                next.extend(self.objects(node, segment).cloned());
            }
            if next.is_empty() {
                return next;
            }
            frontier = next;
        }
        frontier
    }

    /// Canonical N-Triples serialization, one statement per line in insertion order.
    pub fn to_ntriples(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = Graph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}

/// A sequence of predicate IRIs traversed from an instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct PropertyPath(Vec<String>);

impl PropertyPath {
    /// Returns `None` for an empty segment list.
    pub fn new(segments: Vec<String>) -> Option<Self> {
        (!segments.is_empty()).then_some(Self(segments))
    }

    pub fn single(predicate: impl Into<String>) -> Self {
        Self(vec![predicate.into()])
    }

    pub fn child(&self, predicate: impl Into<String>) -> Self {
        let mut segments = self.0.clone();
        segments.push(predicate.into());
        Self(segments)
    }

    pub fn segments(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<PropertyPath> {
        (self.0.len() > 1).then(|| Self(self.0[..self.0.len() - 1].to_vec()))
    }

    /// Dotted local-name form without collision handling, e.g. `address.postalCode`.
    pub fn dotted(&self) -> String {
        self.0.iter().map(|s| local_name(s)).collect::<Vec<_>>().join(".")
    }
}

/// The fragment or last path segment of an IRI.
pub fn local_name(iri: &str) -> &str {
    let cut = iri
        .rfind('#')
        .or_else(|| iri.trim_end_matches('/').rfind('/'))
        .or_else(|| iri.rfind(':'));
    match cut {
        Some(i) => {
            let tail = iri[i + 1..].trim_end_matches('/');
            if tail.is_empty() {
                iri
            } else {
                tail
            }
        }
        None => iri,
    }
}
