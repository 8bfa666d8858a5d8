//! N-Triples parser corpus.

use kgdedup::kg::{Literal, Term};
use kgdedup::parse_ntriples;

const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// A well-formed document, its triple count and, optionally, the expected
/// object of its first triple.
pub struct Positive {
    pub name: &'static str,
    pub text: String,
    pub triples: usize,
    pub first_object: Option<Term>,
}

/// A malformed document and the line its error must be reported on.
pub struct Negative {
    pub name: &'static str,
    pub text: String,
    pub line: usize,
}

fn pos(name: &'static str, text: &str, triples: usize, first_object: Option<Term>) -> Positive {
    Positive {
        name,
        text: text.to_string(),
        triples,
        first_object,
    }
}

fn neg(name: &'static str, text: &str, line: usize) -> Negative {
    Negative {
        name,
        text: text.to_string(),
        line,
    }
}

fn lit(s: &str) -> Option<Term> {
    Some(Term::Literal(Literal::string(s)))
}

pub fn positives() -> Vec<Positive> {
    vec![
        pos(
            "iri object",
            "<http://x/a> <http://x/p> <http://x/b> .\n",
            1,
            Some(Term::Iri("http://x/b".into())),
        ),
        pos(
            "plain literal",
            "<http://x/a> <http://x/p> \"hello\" .\n",
            1,
            lit("hello"),
        ),
        pos(
            "language literal",
            "<http://x/a> <http://x/p> \"chat\"@fr .\n",
            1,
            Some(Term::Literal(Literal::lang("chat", "fr"))),
        ),
        pos(
            "language subtag",
            "<http://x/a> <http://x/p> \"color\"@en-US .\n",
            1,
            Some(Term::Literal(Literal::lang("color", "en-US"))),
        ),
        pos(
            "typed integer",
            &format!("<http://x/a> <http://x/p> \"42\"^^<{XSD}integer> .\n"),
            1,
            Some(Term::Literal(Literal::typed("42", format!("{XSD}integer")))),
        ),
        pos(
            "custom datatype",
            "<http://x/a> <http://x/p> \"x1\"^^<http://x/dt#code> .\n",
            1,
            Some(Term::Literal(Literal::typed("x1", "http://x/dt#code"))),
        ),
        pos(
            "explicit xsd string equals plain",
            &format!("<http://x/a> <http://x/p> \"s\"^^<{XSD}string> .\n"),
            1,
            lit("s"),
        ),
        pos("blank subject", "_:b0 <http://x/p> \"v\" .\n", 1, lit("v")),
        pos(
            "blank object",
            "<http://x/a> <http://x/p> _:n1 .\n",
            1,
            Some(Term::Blank("n1".into())),
        ),
        pos(
            "blank both",
            "_:a <http://x/p> _:b .\n",
            1,
            Some(Term::Blank("b".into())),
        ),
        pos(
            "blank label characters",
            "<http://x/a> <http://x/p> _:b1-x_y.z .\n",
            1,
            Some(Term::Blank("b1-x_y.z".into())),
        ),
        pos(
            "blank label before dot",
            "<http://x/a> <http://x/p> _:b7.\n",
            1,
            Some(Term::Blank("b7".into())),
        ),
        pos(
            "escaped quote",
            "<http://x/a> <http://x/p> \"say \\\"hi\\\"\" .\n",
            1,
            lit("say \"hi\""),
        ),
        pos(
            "escaped backslash",
            "<http://x/a> <http://x/p> \"a\\\\b\" .\n",
            1,
            lit("a\\b"),
        ),
        pos(
            "newline tab return escapes",
            "<http://x/a> <http://x/p> \"1\\n2\\t3\\r\" .\n",
            1,
            lit("1\n2\t3\r"),
        ),
        pos(
            "backspace and form feed",
            "<http://x/a> <http://x/p> \"\\b\\f\" .\n",
            1,
            lit("\u{8}\u{C}"),
        ),
        pos(
            "single quote escape",
            "<http://x/a> <http://x/p> \"it\\'s\" .\n",
            1,
            lit("it's"),
        ),
        pos(
            "short unicode escape",
            "<http://x/a> <http://x/p> \"caf\\u00E9\" .\n",
            1,
            lit("café"),
        ),
        pos(
            "long unicode escape",
            "<http://x/a> <http://x/p> \"\\U0001F600\" .\n",
            1,
            lit("\u{1F600}"),
        ),
        pos(
            "unicode escape in iri",
            "<http://x/a> <http://x/p> <http://x/caf\\u00E9> .\n",
            1,
            Some(Term::Iri("http://x/café".into())),
        ),
        pos(
            "raw non-ascii literal",
            "<http://x/a> <http://x/p> \"Straße\" .\n",
            1,
            lit("Straße"),
        ),
        pos("empty literal", "<http://x/a> <http://x/p> \"\" .\n", 1, lit("")),
        pos(
            "hash and dot inside literal",
            "<http://x/a> <http://x/p> \"a # b .\" .\n",
            1,
            lit("a # b ."),
        ),
        pos(
            "iri with query and fragment",
            "<http://x/a> <http://x/p> <http://x/b?q=1&r=2#frag> .\n",
            1,
            Some(Term::Iri("http://x/b?q=1&r=2#frag".into())),
        ),
        pos(
            "urn scheme",
            "<urn:isbn:0451450523> <http://x/p> <urn:uuid:6e8bc430> .\n",
            1,
            Some(Term::Iri("urn:uuid:6e8bc430".into())),
        ),
        pos("comment only", "# nothing here\n", 0, None),
        pos(
            "trailing comment",
            "<http://x/a> <http://x/p> \"v\" . # note\n",
            1,
            lit("v"),
        ),
        pos(
            "blank and whitespace lines",
            "\n   \n\t\n<http://x/a> <http://x/p> \"v\" .\n\n",
            1,
            lit("v"),
        ),
        pos(
            "crlf line endings",
            "<http://x/a> <http://x/p> \"v\" .\r\n<http://x/b> <http://x/p> \"w\" .\r\n",
            2,
            lit("v"),
        ),
        pos("tab separators", "<http://x/a>\t<http://x/p>\t\"v\"\t.\n", 1, lit("v")),
        pos(
            "no space before dot",
            "<http://x/a> <http://x/p> <http://x/b>.\n",
            1,
            Some(Term::Iri("http://x/b".into())),
        ),
        pos(
            "literal directly before dot",
            "<http://x/a> <http://x/p> \"v\".\n",
            1,
            lit("v"),
        ),
        pos(
            "leading whitespace",
            "   <http://x/a> <http://x/p> \"v\" .\n",
            1,
            lit("v"),
        ),
        pos("no trailing newline", "<http://x/a> <http://x/p> \"v\" .", 1, lit("v")),
        pos(
            "several statements",
            "<http://x/a> <http://x/p> \"1\" .\n<http://x/a> <http://x/q> \"2\" .\n<http://x/b> <http://x/p> \"3\" .\n",
            3,
            lit("1"),
        ),
        pos(
            "duplicates collapse",
            "<http://x/a> <http://x/p> \"v\" .\n<http://x/a> <http://x/p> \"v\" .\n",
            1,
            lit("v"),
        ),
        pos(
            "language and plain differ",
            "<http://x/a> <http://x/p> \"v\" .\n<http://x/a> <http://x/p> \"v\"@en .\n",
            2,
            lit("v"),
        ),
        pos("empty document", "", 0, None),
    ]
}

pub fn negatives() -> Vec<Negative> {
    vec![
        neg("missing dot", "<http://x/a> <http://x/p> \"v\"\n", 1),
        neg("relative iri", "<a> <http://x/p> \"v\" .\n", 1),
        neg(
            "unterminated iri",
            "<http://x/a> <http://x/p> \"v\" .\n<http://x/a> <http://x/p> <http://x/b .\n",
            2,
        ),
        neg("unterminated literal", "<http://x/a> <http://x/p> \"open .\n", 1),
        neg("unknown escape", "<http://x/a> <http://x/p> \"bad \\x\" .\n", 1),
        neg("literal subject", "\"s\" <http://x/p> \"v\" .\n", 1),
        neg("literal predicate", "<http://x/a> \"p\" \"v\" .\n", 1),
        neg("blank predicate", "<http://x/a> _:p \"v\" .\n", 1),
        neg("token after dot", "<http://x/a> <http://x/p> \"v\" . <http://x/b>\n", 1),
        neg("missing object", "<http://x/a> <http://x/p> .\n", 1),
        neg("non-hex unicode escape", "<http://x/a> <http://x/p> \"\\u00ZZ\" .\n", 1),
        neg("surrogate code point", "<http://x/a> <http://x/p> \"\\uD800\" .\n", 1),
        neg("bare word object", "<http://x/a> <http://x/p> hello .\n", 1),
        neg("blank without label", "_: <http://x/p> \"v\" .\n", 1),
        neg("space inside iri", "<http://x/a b> <http://x/p> \"v\" .\n", 1),
        neg("prefixed datatype", "<http://x/a> <http://x/p> \"1\"^^xsd:int .\n", 1),
        neg("empty language tag", "<http://x/a> <http://x/p> \"v\"@ .\n", 1),
        neg(
            "numeric language tag start",
            "<http://x/a> <http://x/p> \"v\"@1en .\n",
            1,
        ),
        neg(
            "error after comments",
            "# one\n# two\n<http://x/a> <http://x/p> oops .\n",
            3,
        ),
        neg(
            "crlf error line",
            "<http://x/a> <http://x/p> \"v\" .\r\n<http://x/a> <http://x/p> \r\n",
            2,
        ),
        neg("double dot", "<http://x/a> <http://x/p> \"v\" . .\n", 1),
        neg(
            "error after good lines",
            "<http://x/a> <http://x/p> \"1\" .\n\n<http://x/a> <http://x/p> \"2\" .\n<http://x/a>\n",
            4,
        ),
    ]
}

/// Runs the corpus; returns (positives, negatives) checked or the first failure.
pub fn check_corpus() -> Result<(usize, usize), String> {
    let positives = positives();
    for p in &positives {
        let g = parse_ntriples(&p.text).map_err(|e| format!("{}: rejected: {e}", p.name))?;
        if g.len() != p.triples {
            return Err(format!("{}: {} triples, expected {}", p.name, g.len(), p.triples));
        }
        if let Some(obj) = &p.first_object {
            let first = &g.iter().next().expect("non-empty").object;
            if first != obj {
                return Err(format!("{}: first object {first:?}, expected {obj:?}", p.name));
            }
        }
        let again = parse_ntriples(&g.to_ntriples()).map_err(|e| format!("{}: reserialized: {e}", p.name))?;
        if again != g {
            return Err(format!("{}: reserialization changed the graph", p.name));
        }
    }
    let negatives = negatives();
    for n in &negatives {
        match parse_ntriples(&n.text) {
            Ok(_) => return Err(format!("{}: accepted", n.name)),
            Err(e) if e.line != n.line => {
                return Err(format!(
                    "{}: error on line {}, expected {} ({e})",
                    n.name, e.line, n.line
                ))
            }
            Err(_) => {}
        }
    }
    Ok((positives.len(), negatives.len()))
}
