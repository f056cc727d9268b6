//! Query documents (requests) and result documents (responses).

use std::fmt::Write as _;

use serde::Deserialize;
use serde_json::json;

use super::lexer::ParseError;
use super::text::{parse_query, parse_signature, print_type};
use super::xmlsyntax::{decls_from_xml, parse_element, query_from_xml, value_to_xml};
use crate::checker::TypeError;
use crate::eval::Undefined;
use crate::kernel::{GeneralType, QueryExpr, SignatureDecl, Value};
use crate::xml::XmlElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    Text,
    Xml,
    Json,
}

impl Format {
    pub fn content_type(self) -> &'static str {
        match self {
            Format::Text => "text/plain; charset=utf-8",
            Format::Xml => "application/xml",
            Format::Json => "application/json",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "xml" => Ok(Format::Xml),
            "json" => Ok(Format::Json),
            _ => Err(format!("unknown format {s:?}; use text, xml or json")),
        }
    }
}

/// A query with optional signature extensions and evaluation flags.
///
/// Extension concepts and relations have empty extensions; extension
/// function and predicate symbols have no interpretation and evaluate to
/// the error value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryDocument {
    pub extensions: Vec<SignatureDecl>,
    pub query: QueryExpr,
    pub lenient_filter: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonDocument {
    query: String,
    #[serde(default, rename = "lenient-filter")]
    lenient_filter: bool,
    #[serde(default)]
    extensions: String,
}

impl QueryDocument {
    pub fn new(query: QueryExpr) -> Self {
        QueryDocument {
            extensions: Vec::new(),
            query,
            lenient_filter: false,
        }
    }

    /// Reads a document, detecting its format: XML starts with `<`, a JSON
    /// object is a JSON document, anything else is a textual query.
    pub fn parse(src: &str) -> Result<(QueryDocument, Format), ParseError> {
        let trimmed = src.trim_start();
        if trimmed.starts_with('<') {
            return Ok((Self::from_xml(src)?, Format::Xml));
        }
        if let Ok(serde_json::Value::Object(_)) = serde_json::from_str::<serde_json::Value>(src) {
            return Ok((Self::from_json(src)?, Format::Json));
        }
        Ok((QueryDocument::new(parse_query(src)?), Format::Text))
    }

    /// `<query lenient-filter="true"><signature>…</signature>Q</query>`, or a
    /// bare query element.
    pub fn from_xml(src: &str) -> Result<QueryDocument, ParseError> {
        let root = parse_element(src)?;
        if root.name != "query" {
            return Ok(QueryDocument::new(query_from_xml(&root)?));
        }
        let lenient_filter = match root.get_attr("lenient-filter") {
            None | Some("false") => false,
            Some("true") => true,
            Some(other) => {
                return Err(ParseError::new(
                    Default::default(),
                    format!("lenient-filter must be true or false, not {other:?}"),
                ))
            }
        };
        let mut extensions = Vec::new();
        let mut query = None;
        for e in root.elements() {
            if e.name == "signature" {
                extensions.extend(decls_from_xml(e)?);
            } else if query.is_none() {
                query = Some(query_from_xml(e)?);
            } else {
                return Err(ParseError::new(Default::default(), "<query> holds exactly one query"));
            }
        }
        let query = query.ok_or_else(|| ParseError::new(Default::default(), "<query> holds no query"))?;
        Ok(QueryDocument {
            extensions,
            query,
            lenient_filter,
        })
    }

    /// `{"query": TEXT, "lenient-filter": bool, "extensions": SIGNATURE-TEXT}`.
    pub fn from_json(src: &str) -> Result<QueryDocument, ParseError> {
        let doc: JsonDocument = serde_json::from_str(src).map_err(|e| ParseError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Ok(QueryDocument {
            extensions: parse_signature(&doc.extensions)?,
            query: parse_query(&doc.query)?,
            lenient_filter: doc.lenient_filter,
        })
    }
}

/// Why a request was not evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    Parse(ParseError),
    Type(TypeError),
    TooLarge { size: usize, limit: usize },
    Internal(String),
}

impl Diagnostic {
    pub fn kind(&self) -> &'static str {
        match self {
            Diagnostic::Parse(_) => "parse",
            Diagnostic::Type(_) => "type",
            Diagnostic::TooLarge { .. } => "too-large",
            Diagnostic::Internal(_) => "internal",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Diagnostic::Parse(e) => e.message.clone(),
            Diagnostic::Type(e) => e.message.clone(),
            Diagnostic::TooLarge { size, limit } => {
                format!("result has {size} elements, more than the limit of {limit}")
            }
            Diagnostic::Internal(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResultDocument {
    Ok { ty: GeneralType, value: Value },
    Undefined { ty: GeneralType, error: Undefined },
    Rejected(Vec<Diagnostic>),
}

fn size_of(v: &Value) -> Option<usize> {
    v.as_set().map(|s| s.len())
}

impl ResultDocument {
    /// The document as sent to clients; every format ends with a newline.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Xml => format!("{}\n", self.to_xml()),
            Format::Json => format!("{}\n", self.to_json()),
        }
    }

    pub fn to_xml(&self) -> XmlElement {
        match self {
            ResultDocument::Ok { ty, value } => {
                let mut e = XmlElement::new("result")
                    .attr("outcome", "ok")
                    .attr("type", print_type(ty));
                if let Some(n) = size_of(value) {
                    e = e.attr("size", n.to_string());
                }
                e.child(value_to_xml(value))
            }
            ResultDocument::Undefined { ty, error } => {
                let args = error
                    .args
                    .iter()
                    .fold(XmlElement::new("args"), |e, v| e.child(value_to_xml(v)));
                let path = error
                    .path
                    .iter()
                    .fold(XmlElement::new("path"), |e, s| e.child(XmlElement::new("step").text(s)));
                XmlElement::new("result")
                    .attr("outcome", "error")
                    .attr("type", print_type(ty))
                    .child(
                        XmlElement::new("undefined")
                            .attr("symbol", &error.symbol)
                            .attr("reason", &error.reason)
                            .child(args)
                            .child(path),
                    )
            }
            ResultDocument::Rejected(ds) => ds.iter().fold(
                XmlElement::new("result").attr("outcome", "error"),
                |e, d| {
                    let mut x = XmlElement::new("diagnostic").attr("kind", d.kind());
                    match d {
                        Diagnostic::Parse(p) => {
                            x = x.attr("line", p.line.to_string()).attr("column", p.column.to_string());
                        }
                        Diagnostic::Type(t) => {
                            x = x.attr("code", t.kind.to_string()).attr("path", t.path.to_string());
                        }
                        _ => {}
                    }
                    e.child(x.text(d.message()))
                },
            ),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ResultDocument::Ok { ty, value } => {
                let mut o = json!({"outcome": "ok", "type": print_type(ty)});
                if let Some(n) = size_of(value) {
                    o["size"] = json!(n);
                }
                o["value"] = serde_json::to_value(value).expect("values serialize");
                o
            }
            ResultDocument::Undefined { ty, error } => json!({
                "outcome": "error",
                "type": print_type(ty),
                "undefined": {
                    "symbol": error.symbol,
                    "reason": error.reason,
                    "args": error.args,
                    "path": error.path,
                }
            }),
            ResultDocument::Rejected(ds) => {
                let ds: Vec<_> = ds
                    .iter()
                    .map(|d| {
                        let mut o = json!({"kind": d.kind(), "message": d.message()});
                        match d {
                            Diagnostic::Parse(p) => {
                                o["line"] = json!(p.line);
                                o["column"] = json!(p.column);
                            }
                            Diagnostic::Type(t) => {
                                o["code"] = json!(t.kind.to_string());
                                o["path"] = json!(t.path.to_string());
                            }
                            _ => {}
                        }
                        o
                    })
                    .collect();
                json!({"outcome": "error", "diagnostics": ds})
            }
        }
    }

    /// One element per line after a `#` header with the type.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self {
            ResultDocument::Ok { ty, value } => match value.as_set() {
                Some(set) => {
                    let _ = writeln!(s, "# {} ({} elements)", print_type(ty), set.len());
                    for v in set {
                        let _ = writeln!(s, "{v}");
                    }
                }
                None => {
                    let _ = writeln!(s, "# {}", print_type(ty));
                    let _ = writeln!(s, "{value}");
                }
            },
            ResultDocument::Undefined { error, .. } => {
                let _ = writeln!(s, "error: {error}");
                for step in &error.path {
                    let _ = writeln!(s, "  at {step}");
                }
            }
            ResultDocument::Rejected(ds) => {
                for d in ds {
                    match d {
                        Diagnostic::Parse(p) => {
                            let _ = writeln!(s, "parse error at {}:{}: {}", p.line, p.column, p.message);
                        }
                        Diagnostic::Type(t) => {
                            let _ = writeln!(s, "type error: {t}");
                        }
                        other => {
                            let _ = writeln!(s, "{} error: {}", other.kind(), other.message());
                        }
                    }
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RelExpr;

    #[test]
    fn format_detection() {
        let (d, f) = QueryDocument::parse("{x in theory | p(x)}").unwrap();
        assert_eq!(f, Format::Text);
        assert!(matches!(d.query, QueryExpr::Comprehension { .. }));
        let (d, f) = QueryDocument::parse(r#"<concept name="theory"/>"#).unwrap();
        assert_eq!((f, d.query), (Format::Xml, QueryExpr::concept("theory")));
        let (d, f) = QueryDocument::parse(
            r#"{"query": "r of uri\"a\"", "lenient-filter": true, "extensions": "relation r : uri -> uri"}"#,
        )
        .unwrap();
        assert_eq!(f, Format::Json);
        assert!(d.lenient_filter);
        assert_eq!(d.extensions.len(), 1);
        assert_eq!(d.query, QueryExpr::image(RelExpr::atom("r"), QueryExpr::uri("uri", "a")));
        assert!(QueryDocument::parse(r#"{"query": "a", "bogus": 1}"#).is_err());
    }

    #[test]
    fn xml_documents_with_extensions() {
        let src = r#"<query lenient-filter="true">
              <signature><concept name="c" of="uri"/></signature>
              <concept name="c"/>
            </query>"#;
        let d = QueryDocument::from_xml(src).unwrap();
        assert!(d.lenient_filter);
        assert_eq!(d.query, QueryExpr::concept("c"));
        assert_eq!(d.extensions.len(), 1);
        assert!(QueryDocument::from_xml("<query/>").is_err());
    }

    #[test]
    fn results_are_sorted_in_every_format() {
        let doc = ResultDocument::Ok {
            ty: GeneralType::set("uri"),
            value: Value::set([Value::uri("b"), Value::uri("a")]),
        };
        assert_eq!(
            doc.render(Format::Xml),
            r#"<result outcome="ok" type="{uri}" size="2"><set><uri>a</uri><uri>b</uri></set></result>
"#
        );
        assert_eq!(
            doc.render(Format::Json),
            r#"{"outcome":"ok","size":2,"type":"{uri}","value":{"set":[{"uri":"a"},{"uri":"b"}]}}
"#
        );
        assert_eq!(doc.render(Format::Text), "# {uri} (2 elements)\na\nb\n");
    }
}
