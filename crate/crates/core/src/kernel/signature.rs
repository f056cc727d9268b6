use std::collections::{HashMap, HashSet};

use super::names::{BaseTypeName, ConceptName, FunName, PredName, RelationName};
use super::types::GeneralType;

/// One declaration of a signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignatureDecl {
    BaseType(BaseTypeName),
    Concept {
        name: ConceptName,
        of: BaseTypeName,
    },
    Relation {
        name: RelationName,
        from: BaseTypeName,
        to: BaseTypeName,
    },
    /// `indexed` declares a family `f_p` of function symbols, one per
    /// positive integer `p`, all sharing this profile.
    Function {
        name: FunName,
        indexed: bool,
        args: Vec<GeneralType>,
        result: GeneralType,
    },
    Predicate {
        name: PredName,
        args: Vec<GeneralType>,
    },
}

impl SignatureDecl {
    pub fn name(&self) -> &str {
        match self {
            SignatureDecl::BaseType(a) => a.as_str(),
            SignatureDecl::Concept { name, .. } => name.as_str(),
            SignatureDecl::Relation { name, .. } => name.as_str(),
            SignatureDecl::Function { name, .. } => name.as_str(),
            SignatureDecl::Predicate { name, .. } => name.as_str(),
        }
    }

    pub fn kind(&self) -> DeclKind {
        match self {
            SignatureDecl::BaseType(_) => DeclKind::BaseType,
            SignatureDecl::Concept { .. } => DeclKind::Concept,
            SignatureDecl::Relation { .. } => DeclKind::Relation,
            SignatureDecl::Function { .. } => DeclKind::Function,
            SignatureDecl::Predicate { .. } => DeclKind::Predicate,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclKind {
    BaseType,
    Concept,
    Relation,
    Function,
    Predicate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunProfile {
    pub indexed: bool,
    pub args: Vec<GeneralType>,
    pub result: GeneralType,
}

/// A well-formed signature. Built by [`crate::checker::check_signature`].
///
/// Names live in one flat namespace. Only function and predicate names may be
/// declared more than once, each time with a different argument profile.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    decls: Vec<SignatureDecl>,
    kinds: HashMap<String, DeclKind>,
    base_types: HashSet<BaseTypeName>,
    concepts: HashMap<ConceptName, BaseTypeName>,
    relations: HashMap<RelationName, (BaseTypeName, BaseTypeName)>,
    functions: HashMap<FunName, Vec<FunProfile>>,
    predicates: HashMap<PredName, Vec<Vec<GeneralType>>>,
    predefined: bool,
}

impl Signature {
    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn decls(&self) -> &[SignatureDecl] {
        &self.decls
    }

    pub fn kind_of(&self, name: &str) -> Option<DeclKind> {
        self.kinds.get(name).copied()
    }

    pub fn has_base_type(&self, a: &BaseTypeName) -> bool {
        self.base_types.contains(a)
    }

    pub fn concept(&self, c: &ConceptName) -> Option<&BaseTypeName> {
        self.concepts.get(c)
    }

    pub fn relation(&self, r: &RelationName) -> Option<(&BaseTypeName, &BaseTypeName)> {
        self.relations.get(r).map(|(a, b)| (a, b))
    }

    /// All overloads of a function symbol, in declaration order.
    pub fn function(&self, f: &FunName) -> &[FunProfile] {
        self.functions.get(f).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All overloads of a predicate symbol, in declaration order.
    pub fn predicate(&self, p: &PredName) -> &[Vec<GeneralType>] {
        self.predicates.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn concepts(&self) -> impl Iterator<Item = (&ConceptName, &BaseTypeName)> {
        self.concepts.iter()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&RelationName, &(BaseTypeName, BaseTypeName))> {
        self.relations.iter()
    }

    pub fn base_types(&self) -> impl Iterator<Item = &BaseTypeName> {
        self.base_types.iter()
    }

    /// Whether the predefined singleton, union, equality and elementhood
    /// families are available.
    pub fn has_predefined(&self) -> bool {
        self.predefined
    }

    pub(crate) fn set_predefined(&mut self) {
        self.predefined = true;
    }

    /// Appends a declaration whose premises the caller has already checked.
    pub(crate) fn push_checked(&mut self, d: SignatureDecl) {
        self.kinds.insert(d.name().to_owned(), d.kind());
        match &d {
            SignatureDecl::BaseType(a) => {
                self.base_types.insert(a.clone());
            }
            SignatureDecl::Concept { name, of } => {
                self.concepts.insert(name.clone(), of.clone());
            }
            SignatureDecl::Relation { name, from, to } => {
                self.relations
                    .insert(name.clone(), (from.clone(), to.clone()));
            }
            SignatureDecl::Function {
                name,
                indexed,
                args,
                result,
            } => self.functions.entry(name.clone()).or_default().push(FunProfile {
                indexed: *indexed,
                args: args.clone(),
                result: result.clone(),
            }),
            SignatureDecl::Predicate { name, args } => self
                .predicates
                .entry(name.clone())
                .or_default()
                .push(args.clone()),
        }
        self.decls.push(d);
    }
}
