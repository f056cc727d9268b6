//! Abstract syntax: signatures, contexts, the four expression families and
//! the value universe shared by the other modules.

mod expr;
mod names;
mod signature;
mod types;
mod value;

pub use expr::{fresh_var, CaptureError, Literal, LiteralValue, PropExpr, QueryExpr, RelExpr};
pub use names::{BaseTypeName, ConceptName, FunName, PredName, RelationName, VarName};
pub use signature::{DeclKind, FunProfile, Signature, SignatureDecl};
pub use types::{Context, GeneralType, SimpleType};
pub use value::Value;
