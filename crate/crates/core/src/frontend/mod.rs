//! Concrete syntaxes, request documents and the shared request handling
//! behind the CLI and the HTTP server.

pub mod document;
pub mod lexer;
pub mod service;
pub mod text;
pub mod xmlsyntax;

pub use document::{Diagnostic, Format, QueryDocument, ResultDocument};
pub use lexer::ParseError;
pub use service::{QueryService, Response, DEFAULT_MAX_RESULTS};
pub use text::{parse_prop, parse_query, parse_relation, parse_signature, print_prop, print_query};
pub use xmlsyntax::{parse_query_xml, query_to_xml};
