//! QMT: a typed query language over formal mathematical libraries.
//!
//! Queries are typed against a [`kernel::Signature`] by [`checker`] and
//! evaluated against a model by [`eval`]. Concept and relation symbols are
//! answered from precomputed indices ([`index`]); function and predicate
//! symbols are host functions. [`mmtlib`] instantiates the language for
//! MMT-style libraries and [`frontend`] provides the concrete syntaxes and
//! the request handling used by the CLI and HTTP server.

pub mod checker;
pub mod eval;
pub mod frontend;
pub mod index;
pub mod kernel;
pub mod mmtlib;
pub mod object;
pub mod sugar;
pub mod xml;

pub use kernel::{
    BaseTypeName, ConceptName, Context, FunName, GeneralType, PredName, PropExpr, QueryExpr,
    RelExpr, RelationName, Signature, SignatureDecl, SimpleType, Value, VarName,
};
pub use object::{Object, VarDecl};
