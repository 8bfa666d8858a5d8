//! Well-known namespace IRIs.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_DATE: &str = "http://www.w3.org/2001/XMLSchema#date";

pub const SH: &str = "http://www.w3.org/ns/shacl#";
pub const SH_TARGET_CLASS: &str = "http://www.w3.org/ns/shacl#targetClass";
pub const SH_PROPERTY: &str = "http://www.w3.org/ns/shacl#property";
pub const SH_PATH: &str = "http://www.w3.org/ns/shacl#path";
pub const SH_DATATYPE: &str = "http://www.w3.org/ns/shacl#datatype";
pub const SH_NODE: &str = "http://www.w3.org/ns/shacl#node";
pub const SH_CLASS: &str = "http://www.w3.org/ns/shacl#class";
pub const SH_MAX_COUNT: &str = "http://www.w3.org/ns/shacl#maxCount";

pub const SCHEMA: &str = "https://schema.org/";

/// Metadata vocabulary for shape conformance.
pub const DS: &str = "https://example.org/ds/";
pub const DS_COMPLIES_WITH: &str = "https://example.org/ds/compliesWith";

/// Expands `xsd:`, `rdf:`, `sh:` and `schema:` prefixed names; other strings are returned as-is.
pub fn expand(name: &str) -> String {
    for (prefix, ns) in [("xsd:", XSD), ("rdf:", RDF), ("sh:", SH), ("schema:", SCHEMA)] {
        if let Some(rest) = name.strip_prefix(prefix) {
            return format!("{ns}{rest}");
        }
    }
    name.to_string()
}
