//! The query language instantiated for MMT-style libraries: a fixed
//! signature over URIs, objects and XML, ontology facts extracted from a
//! [`Library`], and the function and predicate symbols implemented on top
//! of it.

mod library;
mod objects;
mod render;
mod typing;
mod unify;

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

pub use library::{
    Constant, DeclarationKind, Fixity, Library, LoadError, Notation, Style, Theory, View,
};
pub use objects::{merge_free, occurs, subobjat, subobjhead, subterms, Occurrence};
pub use render::{render_declaration, render_object};
pub use typing::{typeof_, Registry, Stlc, TypeSystem, TypeofError, ARROW, LAMBDA, STLC};
pub use unify::{
    apply_substitution, decode_substitution, encode_substitution, match_object, Entry, SubtermIndex,
};

use crate::checker::check_signature;
use crate::eval::{HostFunctions, Model};
use crate::index::{build_index, Fact, Index, IndexError};
use crate::kernel::{
    BaseTypeName, FunName, GeneralType, PredName, Signature, SignatureDecl, SimpleType, Value,
};
use crate::object::{Object, FREE, PAIR, SUBST};
use crate::sugar::install_predefined;

pub const URI: &str = "uri";
pub const OBJ: &str = "obj";
pub const XML: &str = "xml";

/// Symbols that belong to every object universe.
pub const RESERVED_SYMBOLS: [&str; 5] = [FREE, SUBST, PAIR, ARROW, LAMBDA];

/// The declarations of the MMT signature, in order.
pub fn signature_decls() -> Vec<SignatureDecl> {
    let concept = |c: &str| SignatureDecl::Concept {
        name: c.into(),
        of: URI.into(),
    };
    let relation = |r: &str| SignatureDecl::Relation {
        name: r.into(),
        from: URI.into(),
        to: URI.into(),
    };
    let fun = |f: &str, indexed: bool, args: Vec<GeneralType>, result: GeneralType| {
        SignatureDecl::Function {
            name: f.into(),
            indexed,
            args,
            result,
        }
    };
    let e = GeneralType::elem;
    vec![
        SignatureDecl::BaseType(URI.into()),
        SignatureDecl::BaseType(OBJ.into()),
        SignatureDecl::BaseType(XML.into()),
        concept("theory"),
        concept("view"),
        concept("constant"),
        concept("style"),
        relation("includes"),
        relation("declares"),
        relation("domain"),
        relation("codomain"),
        fun("typeOF", false, vec![e(URI)], e(OBJ)),
        fun("defOF", false, vec![e(URI)], e(OBJ)),
        fun("typeof", false, vec![e(URI), e(OBJ)], e(OBJ)),
        fun("subobjat", true, vec![e(OBJ)], e(OBJ)),
        fun("subobjhead", false, vec![e(OBJ), e(URI)], GeneralType::set(OBJ)),
        fun(
            "unify",
            false,
            vec![e(OBJ)],
            GeneralType::Set(SimpleType::new(vec![URI.into(), OBJ.into(), OBJ.into()])),
        ),
        fun("render", false, vec![e(URI), e(URI)], e(XML)),
        fun("render", false, vec![e(OBJ), e(URI)], e(XML)),
        SignatureDecl::Predicate {
            name: "occurs".into(),
            args: vec![e(URI), e(OBJ)],
        },
    ]
}

/// The MMT signature with the predefined symbols installed.
pub fn signature() -> Signature {
    let sig = check_signature(&signature_decls()).expect("the MMT signature is well-formed");
    install_predefined(&sig)
}

/// Ontology facts: concept membership, direct and reflexive includes,
/// declares through transitive includes, and view endpoints.
pub fn extract_facts(lib: &Library) -> Vec<Fact> {
    let uri = |s: &str| Value::uri(s);
    let mut out = Vec::new();
    for t in lib.theories() {
        out.push(Fact::Concept("theory".into(), uri(&t.uri)));
        out.push(Fact::Relation("includes".into(), uri(&t.uri), uri(&t.uri)));
        for i in &t.includes {
            out.push(Fact::Relation("includes".into(), uri(&t.uri), uri(i)));
        }
        let mut seen = HashSet::from([t.uri.as_str()]);
        let mut queue = VecDeque::from([t]);
        while let Some(cur) = queue.pop_front() {
            for c in &cur.constants {
                out.push(Fact::Relation("declares".into(), uri(&t.uri), uri(c)));
            }
            for i in &cur.includes {
                if seen.insert(i) {
                    if let Some(next) = lib.theory(i) {
                        queue.push_back(next);
                    }
                }
            }
        }
    }
    for c in lib.constants() {
        out.push(Fact::Concept("constant".into(), uri(&c.uri)));
    }
    for v in lib.views() {
        out.push(Fact::Concept("view".into(), uri(&v.uri)));
        out.push(Fact::Relation("domain".into(), uri(&v.uri), uri(&v.domain)));
        out.push(Fact::Relation("codomain".into(), uri(&v.uri), uri(&v.codomain)));
    }
    for s in lib.styles() {
        out.push(Fact::Concept("style".into(), uri(&s.uri)));
    }
    out
}

/// The function and predicate symbols of the MMT signature over a library.
pub struct MmtHost {
    lib: Arc<Library>,
    universe: HashSet<String>,
    subterms: SubtermIndex,
    typing: Registry,
}

impl MmtHost {
    pub fn new(lib: Arc<Library>) -> Self {
        MmtHost {
            universe: lib.uri_universe().into_iter().collect(),
            subterms: SubtermIndex::build(&lib),
            typing: Registry::for_library(&lib),
            lib,
        }
    }

    pub fn library(&self) -> &Library {
        &self.lib
    }

    pub fn registry_mut(&mut self) -> &mut Registry {
        &mut self.typing
    }

    pub fn subterm_index(&self) -> &SubtermIndex {
        &self.subterms
    }

    pub fn is_uri(&self, u: &str) -> bool {
        self.universe.contains(u)
    }

    /// Objects built from declared and reserved symbols only.
    pub fn is_object(&self, o: &Object) -> bool {
        o.symbols()
            .into_iter()
            .all(|s| self.universe.contains(s) || RESERVED_SYMBOLS.contains(&s))
    }

    fn constant(&self, u: &str) -> Result<&Constant, String> {
        self.lib
            .constant(u)
            .ok_or_else(|| format!("{u} is not a constant"))
    }
}

fn uri_arg(v: &Value) -> &str {
    v.as_uri().expect("checked argument of type uri")
}

fn obj_arg(v: &Value) -> &Object {
    v.as_obj().expect("checked argument of type obj")
}

impl HostFunctions for MmtHost {
    fn call_function(
        &self,
        name: &FunName,
        index: Option<u32>,
        overload: usize,
        args: &[Value],
    ) -> Result<Value, String> {
        match (name.as_str(), overload) {
            ("typeOF", 0) => {
                let c = self.constant(uri_arg(&args[0]))?;
                c.ty.clone()
                    .map(Value::Obj)
                    .ok_or_else(|| format!("{} has no type", c.uri))
            }
            ("defOF", 0) => {
                let c = self.constant(uri_arg(&args[0]))?;
                c.def
                    .clone()
                    .map(Value::Obj)
                    .ok_or_else(|| format!("{} has no definiens", c.uri))
            }
            ("typeof", 0) => typeof_(&self.typing, &self.lib, uri_arg(&args[0]), obj_arg(&args[1]))
                .map(Value::Obj)
                .map_err(|e| e.to_string()),
            ("subobjat", 0) => {
                let p = index.expect("indexed family");
                subobjat(p, obj_arg(&args[0]))
                    .map(Value::Obj)
                    .ok_or_else(|| format!("no subobject at position {p}"))
            }
            ("subobjhead", 0) => Ok(Value::set(
                subobjhead(obj_arg(&args[0]), uri_arg(&args[1]))
                    .into_iter()
                    .map(Value::Obj),
            )),
            ("unify", 0) => Ok(Value::set(self.subterms.unify(obj_arg(&args[0])).into_iter().map(
                |(u, o, s)| Value::Tuple(vec![Value::Uri(u), Value::Obj(o), Value::Obj(s)]),
            ))),
            ("render", 0) => render_declaration(&self.lib, uri_arg(&args[0]), uri_arg(&args[1])).map(Value::Xml),
            ("render", 1) => render_object(&self.lib, obj_arg(&args[0]), uri_arg(&args[1])).map(Value::Xml),
            _ => Err(format!("{name} has no interpretation in this library")),
        }
    }

    fn call_predicate(&self, name: &PredName, overload: usize, args: &[Value]) -> Result<bool, String> {
        match (name.as_str(), overload) {
            ("occurs", 0) => Ok(occurs(uri_arg(&args[0]), obj_arg(&args[1]))),
            _ => Err(format!("{name} has no interpretation in this library")),
        }
    }

    fn is_member(&self, a: &BaseTypeName, v: &Value) -> bool {
        match (a.as_str(), v) {
            (URI, Value::Uri(u)) => self.is_uri(u),
            (OBJ, Value::Obj(o)) => self.is_object(o),
            (XML, Value::Xml(_)) => true,
            _ => false,
        }
    }
}

/// Builds the indices of a library.
pub fn build_library_index(lib: &Library, host: &MmtHost) -> Result<Index, IndexError> {
    build_index(&signature(), extract_facts(lib), &|a, v| host.is_member(a, v))
}

/// A model of the MMT signature for one library, with freshly built indices.
pub fn model(lib: Library) -> Result<Model, IndexError> {
    let lib = Arc::new(lib);
    let host = MmtHost::new(lib.clone());
    let index = build_library_index(&lib, &host)?;
    Ok(model_with_index(host, index))
}

/// A model over indices loaded from elsewhere, e.g. a cache file.
pub fn model_with_index(host: MmtHost, index: Index) -> Model {
    Model {
        signature: signature(),
        index: Arc::new(index),
        host: Arc::new(host),
    }
}

/// Counts reported by `check`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LibraryStats {
    pub theories: usize,
    pub constants: usize,
    pub views: usize,
    pub styles: usize,
    pub facts: usize,
    pub subterms: usize,
}

pub fn stats(lib: &Library) -> LibraryStats {
    let mut idx = Index::default();
    for f in extract_facts(lib) {
        idx.insert(f);
    }
    LibraryStats {
        theories: lib.theories().count(),
        constants: lib.constants().count(),
        views: lib.views().count(),
        styles: lib.styles().count(),
        facts: idx.facts().len(),
        subterms: SubtermIndex::build(lib).len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{eval_query, Assignment, EvalOptions, EvalOutcome};
    use crate::kernel::{QueryExpr, RelExpr};

    fn has(facts: &[Fact], f: Fact) -> bool {
        facts.contains(&f)
    }

    fn rel(r: &str, a: &str, b: &str) -> Fact {
        Fact::Relation(r.into(), Value::uri(a), Value::uri(b))
    }

    #[test]
    fn single_theory_facts() {
        let lib = Library::from_json_str(r#"{"theories":[{"uri":"urn:T","constants":[{"uri":"c"}]}]}"#).unwrap();
        let f = extract_facts(&lib);
        assert!(has(&f, rel("declares", "urn:T", "urn:T?c")));
        assert!(has(&f, rel("includes", "urn:T", "urn:T")));
    }

    #[test]
    fn declares_is_induced_by_includes() {
        let lib = Library::from_json_str(
            r#"{"theories":[{"uri":"urn:T1","constants":[{"uri":"c"}]},{"uri":"urn:T2","includes":["urn:T1"]}],
               "views":[{"uri":"urn:v","domain":"urn:T1","codomain":"urn:T2"}]}"#,
        )
        .unwrap();
        let f = extract_facts(&lib);
        assert!(has(&f, rel("declares", "urn:T2", "urn:T1?c")));
        assert!(has(&f, rel("domain", "urn:v", "urn:T1")));
        assert!(has(&f, rel("codomain", "urn:v", "urn:T2")));
    }

    #[test]
    fn signature_is_well_formed_with_two_render_overloads() {
        let sig = signature();
        assert_eq!(sig.function(&"render".into()).len(), 2);
        assert!(sig.has_predefined());
    }

    #[test]
    fn literals_outside_the_universe_are_undefined() {
        let lib = Library::from_json_str(r#"{"theories":[{"uri":"urn:T"}]}"#).unwrap();
        let m = model(lib).unwrap();
        let run = |q: QueryExpr| eval_query(&m, &Assignment::new(), &q, EvalOptions::default()).unwrap().1;
        assert_eq!(run(QueryExpr::uri(URI, "urn:T")), EvalOutcome::Ok(Value::uri("urn:T")));
        assert!(run(QueryExpr::uri(URI, "urn:nope")).is_undefined());
        assert!(run(QueryExpr::obj(OBJ, Object::sym("urn:T"))).ok().is_some());
        assert!(run(QueryExpr::obj(OBJ, Object::sym("urn:nope"))).is_undefined());
        let q = QueryExpr::image(RelExpr::atom("includes"), QueryExpr::uri(URI, "urn:T"));
        assert_eq!(run(q), EvalOutcome::Ok(Value::set([Value::uri("urn:T")])));
    }

    #[test]
    fn partial_functions() {
        let lib = Library::from_json_str(
            r#"{"theories":[{"uri":"urn:T","constants":[{"uri":"c","type":{"OMS":"urn:T"}}]}]}"#,
        )
        .unwrap();
        let m = model(lib).unwrap();
        let run = |q: QueryExpr| eval_query(&m, &Assignment::new(), &q, EvalOptions::default()).unwrap().1;
        let app = |f: &str, u: &str| QueryExpr::apply(f, vec![QueryExpr::uri(URI, u)]);
        assert_eq!(run(app("typeOF", "urn:T?c")), EvalOutcome::Ok(Value::Obj(Object::sym("urn:T"))));
        assert!(run(app("typeOF", "urn:T")).is_undefined());
        assert!(run(app("defOF", "urn:T?c")).is_undefined());
    }
}
