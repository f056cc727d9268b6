//! Request handling shared by the CLI and the HTTP server, so both produce
//! byte-identical result documents.

use std::panic::{catch_unwind, AssertUnwindSafe};

use super::document::{Diagnostic, Format, QueryDocument, ResultDocument};
use super::xmlsyntax::signature_to_xml;
use crate::checker::extend_signature;
use crate::eval::{eval_query, Assignment, EvalOptions, EvalOutcome, Model};

pub const DEFAULT_MAX_RESULTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub format: Format,
    pub body: String,
    /// Evaluation ended in the error value.
    pub undefined: bool,
}

impl Response {
    pub fn content_type(&self) -> &'static str {
        self.format.content_type()
    }
}

pub struct QueryService {
    model: Model,
    max_results: usize,
}

impl QueryService {
    pub fn new(model: Model) -> Self {
        QueryService {
            model,
            max_results: DEFAULT_MAX_RESULTS,
        }
    }

    pub fn with_max_results(mut self, n: usize) -> Self {
        self.max_results = n;
        self
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn signature_xml(&self) -> String {
        signature_to_xml(&self.model.signature).to_string()
    }

    /// Evaluates a parsed document; the status is the HTTP code to report.
    pub fn run(&self, doc: &QueryDocument) -> (u16, ResultDocument) {
        let sig = match extend_signature(&self.model.signature, &doc.extensions) {
            Ok(s) => s,
            Err(es) => {
                return (400, ResultDocument::Rejected(es.into_iter().map(Diagnostic::Type).collect()))
            }
        };
        let model = Model {
            signature: sig,
            index: self.model.index.clone(),
            host: self.model.host.clone(),
        };
        let options = EvalOptions {
            lenient_filter: doc.lenient_filter,
        };
        let run = catch_unwind(AssertUnwindSafe(|| {
            eval_query(&model, &Assignment::new(), &doc.query, options)
        }));
        match run {
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "evaluation panicked".into());
                (500, ResultDocument::Rejected(vec![Diagnostic::Internal(msg)]))
            }
            Ok(Err(e)) => (400, ResultDocument::Rejected(vec![Diagnostic::Type(e)])),
            Ok(Ok((ty, EvalOutcome::Undefined(error)))) => (200, ResultDocument::Undefined { ty, error }),
            Ok(Ok((ty, EvalOutcome::Ok(value)))) => match value.as_set().map(|s| s.len()) {
                Some(size) if size > self.max_results => (
                    413,
                    ResultDocument::Rejected(vec![Diagnostic::TooLarge {
                        size,
                        limit: self.max_results,
                    }]),
                ),
                _ => (200, ResultDocument::Ok { ty, value }),
            },
        }
    }

    /// Parses and evaluates a request body. The response uses `format` if
    /// given and the request's own format otherwise; unparseable requests
    /// are answered in `format` or text.
    pub fn handle(&self, body: &str, format: Option<Format>) -> Response {
        self.handle_with(body, format, false)
    }

    /// Like [`QueryService::handle`]; `lenient_filter` forces lenient
    /// evaluation regardless of the document's flag.
    pub fn handle_with(&self, body: &str, format: Option<Format>, lenient_filter: bool) -> Response {
        let (status, format, result) = match QueryDocument::parse(body) {
            Err(e) => (
                400,
                format.unwrap_or(Format::Text),
                ResultDocument::Rejected(vec![Diagnostic::Parse(e)]),
            ),
            Ok((mut doc, detected)) => {
                doc.lenient_filter |= lenient_filter;
                let (status, result) = self.run(&doc);
                (status, format.unwrap_or(detected), result)
            }
        };
        Response {
            status,
            format,
            body: result.render(format),
            undefined: matches!(result, ResultDocument::Undefined { .. }),
        }
    }
}
