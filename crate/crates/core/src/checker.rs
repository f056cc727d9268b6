//! Decision procedures for the typing judgments: signature well-formedness,
//! type well-formedness, query typing, relation typing and proposition
//! well-formedness.
//!
//! Overloaded function and predicate symbols are resolved by exact argument
//! type match. [`resolve_query`] additionally records which overload was
//! chosen at every application so that the evaluator can dispatch without
//! re-inferring types.

use std::collections::HashMap;
use std::fmt;

use crate::kernel::{
    BaseTypeName, Context, DeclKind, FunName, GeneralType, PredName, PropExpr, QueryExpr, RelExpr,
    Signature, SignatureDecl, SimpleType,
};
use crate::sugar::{self, Predefined};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeErrorKind {
    UnknownSymbol,
    ArityMismatch,
    TypeMismatch,
    NotAProduct,
    ProjOutOfRange,
    RelationEndpointMismatch,
    DuplicateName,
    OverloadAmbiguous,
    UnboundVariable,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Location of a subexpression: a list of steps from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExprPath(pub Vec<String>);

impl fmt::Display for ExprPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("$");
        }
        f.write_str("$/")?;
        f.write_str(&self.0.join("/"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at {path}: {message}")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub path: ExprPath,
    pub message: String,
}

impl TypeError {
    fn new(kind: TypeErrorKind, path: &[String], message: impl Into<String>) -> Self {
        TypeError {
            kind,
            path: ExprPath(path.to_vec()),
            message: message.into(),
        }
    }
}

/// How an application was resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolved {
    /// Index into the symbol's overload list in the signature.
    Declared(usize),
    Predefined(Predefined),
}

/// Overload choices keyed by the address of the application node. Only
/// valid for the exact expression tree that was checked.
#[derive(Debug, Default)]
pub struct Resolutions {
    functions: HashMap<usize, Resolved>,
    predicates: HashMap<usize, Resolved>,
}

impl Resolutions {
    pub fn function(&self, q: &QueryExpr) -> Option<Resolved> {
        self.functions.get(&(q as *const QueryExpr as usize)).copied()
    }

    pub fn predicate(&self, f: &PropExpr) -> Option<Resolved> {
        self.predicates.get(&(f as *const PropExpr as usize)).copied()
    }
}

// ---------------------------------------------------------------------------
// signatures and types

/// Checks declarations in order, each against the prefix before it.
pub fn check_signature(decls: &[SignatureDecl]) -> Result<Signature, Vec<TypeError>> {
    extend_signature(&Signature::empty(), decls)
}

/// Checks `decls` as an extension of an existing well-formed signature.
pub fn extend_signature(
    base: &Signature,
    decls: &[SignatureDecl],
) -> Result<Signature, Vec<TypeError>> {
    let mut sig = base.clone();
    let mut errors = Vec::new();
    for (i, d) in decls.iter().enumerate() {
        let path = vec![format!("decl{}({})", i + 1, d.name())];
        match check_decl(&sig, d, &path) {
            Ok(()) => sig.push_checked(d.clone()),
            Err(e) => errors.push(e),
        }
    }
    if errors.is_empty() {
        Ok(sig)
    } else {
        Err(errors)
    }
}

fn check_decl(sig: &Signature, d: &SignatureDecl, path: &[String]) -> Result<(), TypeError> {
    let name = d.name();
    if sugar::is_reserved_name(name) {
        return Err(TypeError::new(
            TypeErrorKind::DuplicateName,
            path,
            format!("{name} is predefined"),
        ));
    }
    let fresh = |sig: &Signature| -> Result<(), TypeError> {
        match sig.kind_of(name) {
            None => Ok(()),
            Some(_) => Err(TypeError::new(
                TypeErrorKind::DuplicateName,
                path,
                format!("{name} is already declared"),
            )),
        }
    };
    let base = |a: &BaseTypeName| -> Result<(), TypeError> {
        if sig.has_base_type(a) {
            Ok(())
        } else {
            Err(TypeError::new(
                TypeErrorKind::UnknownSymbol,
                path,
                format!("{a} is not a declared base type"),
            ))
        }
    };
    match d {
        SignatureDecl::BaseType(_) => fresh(sig),
        SignatureDecl::Concept { of, .. } => {
            fresh(sig)?;
            base(of)
        }
        SignatureDecl::Relation { from, to, .. } => {
            fresh(sig)?;
            base(from)?;
            base(to)
        }
        SignatureDecl::Function {
            name: f,
            args,
            result,
            ..
        } => {
            match sig.kind_of(name) {
                None => {}
                Some(DeclKind::Function) => {
                    if sig.function(f).iter().any(|p| p.args == *args) {
                        return Err(TypeError::new(
                            TypeErrorKind::DuplicateName,
                            path,
                            format!("{name} already has an overload with these arguments"),
                        ));
                    }
                }
                Some(_) => fresh(sig)?,
            }
            for t in args.iter().chain(std::iter::once(result)) {
                check_type_at(sig, t, path)?;
            }
            Ok(())
        }
        SignatureDecl::Predicate { name: p, args } => {
            match sig.kind_of(name) {
                None => {}
                Some(DeclKind::Predicate) => {
                    if sig.predicate(p).iter().any(|a| a == args) {
                        return Err(TypeError::new(
                            TypeErrorKind::DuplicateName,
                            path,
                            format!("{name} already has an overload with these arguments"),
                        ));
                    }
                }
                Some(_) => fresh(sig)?,
            }
            for t in args {
                check_type_at(sig, t, path)?;
            }
            Ok(())
        }
    }
}

pub fn check_type(sig: &Signature, t: &GeneralType) -> Result<(), TypeError> {
    check_type_at(sig, t, &[])
}

fn check_type_at(sig: &Signature, t: &GeneralType, path: &[String]) -> Result<(), TypeError> {
    match t.simple().components().iter().find(|a| !sig.has_base_type(a)) {
        None => Ok(()),
        Some(a) => Err(TypeError::new(
            TypeErrorKind::UnknownSymbol,
            path,
            format!("{a} is not a declared base type"),
        )),
    }
}

// ---------------------------------------------------------------------------
// expressions

pub fn infer_query(sig: &Signature, ctx: &Context, q: &QueryExpr) -> Result<GeneralType, TypeError> {
    Checker::new(sig, None).query(ctx, q)
}

/// Like [`infer_query`], also returning the overload chosen at each application.
pub fn resolve_query(
    sig: &Signature,
    ctx: &Context,
    q: &QueryExpr,
) -> Result<(GeneralType, Resolutions), TypeError> {
    let mut res = Resolutions::default();
    let t = Checker::new(sig, Some(&mut res)).query(ctx, q)?;
    Ok((t, res))
}

/// Typing for a top-level query: it must be closed.
pub fn check_closed_query(sig: &Signature, q: &QueryExpr) -> Result<GeneralType, TypeError> {
    if let Some(x) = q.free_vars().into_iter().next() {
        return Err(TypeError::new(
            TypeErrorKind::UnboundVariable,
            &[],
            format!("top-level query has free variable {x}"),
        ));
    }
    infer_query(sig, &Context::new(), q)
}

pub fn check_relation(
    sig: &Signature,
    r: &RelExpr,
) -> Result<(BaseTypeName, BaseTypeName), TypeError> {
    Checker::new(sig, None).relation(r)
}

pub fn check_prop(sig: &Signature, ctx: &Context, f: &PropExpr) -> Result<(), TypeError> {
    Checker::new(sig, None).prop(ctx, f)
}

pub fn resolve_prop(sig: &Signature, ctx: &Context, f: &PropExpr) -> Result<Resolutions, TypeError> {
    let mut res = Resolutions::default();
    Checker::new(sig, Some(&mut res)).prop(ctx, f)?;
    Ok(res)
}

struct Checker<'a> {
    sig: &'a Signature,
    path: Vec<String>,
    res: Option<&'a mut Resolutions>,
}

impl<'a> Checker<'a> {
    fn new(sig: &'a Signature, res: Option<&'a mut Resolutions>) -> Self {
        Checker {
            sig,
            path: Vec::new(),
            res,
        }
    }

    fn err(&self, kind: TypeErrorKind, message: impl Into<String>) -> TypeError {
        TypeError::new(kind, &self.path, message)
    }

    fn at<T>(&mut self, step: impl Into<String>, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(step.into());
        let r = f(self);
        self.path.pop();
        r
    }

    fn query(&mut self, ctx: &Context, q: &QueryExpr) -> Result<GeneralType, TypeError> {
        use TypeErrorKind::*;
        match q {
            QueryExpr::Concept(c) => match self.sig.concept(c) {
                Some(a) => Ok(GeneralType::Set(SimpleType::base(a.clone()))),
                None => Err(self.err(UnknownSymbol, format!("{c} is not a declared concept"))),
            },
            QueryExpr::Var(x) => match ctx.lookup(x) {
                Some(t) => Ok(GeneralType::Elem(t.clone())),
                None => Err(self.err(UnboundVariable, format!("variable {x} is not bound"))),
            },
            QueryExpr::Literal(lit) => {
                if self.sig.has_base_type(&lit.base) {
                    Ok(GeneralType::Elem(SimpleType::base(lit.base.clone())))
                } else {
                    Err(self.err(UnknownSymbol, format!("{} is not a declared base type", lit.base)))
                }
            }
            QueryExpr::Apply { fun, index, args } => {
                let step = format!("apply({fun})");
                self.at(step, |c| c.apply(ctx, q, fun, *index, args))
            }
            QueryExpr::Tuple(items) => self.at("tuple", |c| {
                if items.is_empty() {
                    return Err(c.err(ArityMismatch, "empty tuple"));
                }
                let mut comps = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    let t = c.at(format!("item{}", i + 1), |c| c.query(ctx, item))?;
                    match t {
                        GeneralType::Elem(s) if items.len() == 1 => return Ok(GeneralType::Elem(s)),
                        GeneralType::Elem(s) if s.arity() == 1 => comps.extend_from_slice(s.components()),
                        other => {
                            return Err(c.err(
                                TypeMismatch,
                                format!("tuple component {} has type {other}, expected a base type", i + 1),
                            ))
                        }
                    }
                }
                Ok(GeneralType::Elem(SimpleType::new(comps)))
            }),
            QueryExpr::Proj(inner, i) => self.at(format!("proj{i}"), |c| {
                let t = c.query(ctx, inner)?;
                let s = match t {
                    GeneralType::Set(_) => {
                        return Err(c.err(NotAProduct, format!("cannot project from set type {t}")))
                    }
                    GeneralType::Elem(s) => s,
                };
                if *i == 0 {
                    return Err(c.err(ProjOutOfRange, "projections are 1-based"));
                }
                if s.arity() == 1 {
                    return if *i == 1 {
                        Ok(GeneralType::Elem(s))
                    } else {
                        Err(c.err(NotAProduct, format!("cannot take component {i} of base type {s}")))
                    };
                }
                match s.components().get(i - 1) {
                    Some(a) => Ok(GeneralType::Elem(SimpleType::base(a.clone()))),
                    None => Err(c.err(
                        ProjOutOfRange,
                        format!("component {i} of {s} does not exist"),
                    )),
                }
            }),
            QueryExpr::Image(r, arg) => self.at("image", |c| {
                let (from, to) = c.at("relation", |c| c.relation(r))?;
                let t = c.at("argument", |c| c.query(ctx, arg))?;
                match t.clone() {
                    GeneralType::Elem(s) if s.as_base() == Some(&from) => {
                        Ok(GeneralType::Set(SimpleType::base(to)))
                    }
                    _ => Err(c.err(
                        TypeMismatch,
                        format!("relation starts at {from} but argument has type {t}"),
                    )),
                }
            }),
            QueryExpr::BigUnion { var, domain, body } => self.at("bigunion", |c| {
                let t = c.at("domain", |c| c.set_domain(ctx, domain))?;
                let inner = ctx.extend(var.clone(), t);
                let bt = c.at("body", |c| c.query(&inner, body))?;
                match bt {
                    GeneralType::Set(_) => Ok(bt),
                    other => Err(c.at("body", |c| {
                        c.err(TypeMismatch, format!("union body has type {other}, expected a set"))
                    })),
                }
            }),
            QueryExpr::Comprehension {
                var,
                domain,
                filter,
            } => self.at("comprehension", |c| {
                let t = c.at("domain", |c| c.set_domain(ctx, domain))?;
                let inner = ctx.extend(var.clone(), t.clone());
                c.at("filter", |c| c.prop(&inner, filter))?;
                Ok(GeneralType::Set(t))
            }),
        }
    }

    fn set_domain(&mut self, ctx: &Context, q: &QueryExpr) -> Result<SimpleType, TypeError> {
        match self.query(ctx, q)? {
            GeneralType::Set(t) => Ok(t),
            other => Err(self.err(
                TypeErrorKind::TypeMismatch,
                format!("binding domain has type {other}, expected a set"),
            )),
        }
    }

    fn arg_types(&mut self, ctx: &Context, args: &[QueryExpr]) -> Result<Vec<GeneralType>, TypeError> {
        args.iter()
            .enumerate()
            .map(|(i, a)| self.at(format!("arg{}", i + 1), |c| c.query(ctx, a)))
            .collect()
    }

    fn apply(
        &mut self,
        ctx: &Context,
        node: &QueryExpr,
        fun: &FunName,
        index: Option<u32>,
        args: &[QueryExpr],
    ) -> Result<GeneralType, TypeError> {
        use TypeErrorKind::*;
        let tys = self.arg_types(ctx, args)?;
        if self.sig.has_predefined() {
            if let Some(p) = sugar::predefined_function(fun.as_str()) {
                if index.is_some() {
                    return Err(self.err(ArityMismatch, format!("{fun} is not an indexed family")));
                }
                let t = sugar::predefined_function_type(p, &tys)
                    .map_err(|(kind, msg)| self.err(kind, msg))?;
                self.record_function(node, Resolved::Predefined(p));
                return Ok(t);
            }
        }
        let profiles = self.sig.function(fun);
        if profiles.is_empty() {
            return Err(self.err(UnknownSymbol, format!("{fun} is not a declared function")));
        }
        let mut matches = profiles
            .iter()
            .enumerate()
            .filter(|(_, p)| p.args == tys);
        let Some((idx, profile)) = matches.next() else {
            return Err(if profiles.iter().all(|p| p.args.len() != tys.len()) {
                self.err(
                    ArityMismatch,
                    format!("{fun} applied to {} arguments", tys.len()),
                )
            } else {
                self.err(
                    TypeMismatch,
                    format!("no overload of {fun} accepts ({})", join(&tys)),
                )
            });
        };
        if matches.next().is_some() {
            return Err(self.err(OverloadAmbiguous, format!("{fun} is ambiguous at ({})", join(&tys))));
        }
        match (profile.indexed, index) {
            (true, None) => {
                return Err(self.err(ArityMismatch, format!("{fun} is an indexed family and needs an index")))
            }
            (false, Some(_)) => {
                return Err(self.err(ArityMismatch, format!("{fun} is not an indexed family")))
            }
            _ => {}
        }
        self.record_function(node, Resolved::Declared(idx));
        Ok(profile.result.clone())
    }

    fn record_function(&mut self, node: &QueryExpr, r: Resolved) {
        if let Some(res) = self.res.as_deref_mut() {
            res.functions.insert(node as *const QueryExpr as usize, r);
        }
    }

    fn record_predicate(&mut self, node: &PropExpr, r: Resolved) {
        if let Some(res) = self.res.as_deref_mut() {
            res.predicates.insert(node as *const PropExpr as usize, r);
        }
    }

    fn relation(&mut self, r: &RelExpr) -> Result<(BaseTypeName, BaseTypeName), TypeError> {
        use TypeErrorKind::*;
        match r {
            RelExpr::Atomic(name) => match self.sig.relation(name) {
                Some((a, b)) => Ok((a.clone(), b.clone())),
                None => Err(self.err(UnknownSymbol, format!("{name} is not a declared relation"))),
            },
            RelExpr::Inverse(inner) => {
                let (a, b) = self.at("inverse", |c| c.relation(inner))?;
                Ok((b, a))
            }
            RelExpr::TransClosure(inner) => {
                let (a, b) = self.at("closure", |c| c.relation(inner))?;
                if a == b {
                    Ok((a, b))
                } else {
                    Err(self.err(
                        RelationEndpointMismatch,
                        format!("closure needs equal endpoints, found {a} and {b}"),
                    ))
                }
            }
            RelExpr::Compose(l, rr) => {
                let (a, b) = self.at("compose.left", |c| c.relation(l))?;
                let (b2, c2) = self.at("compose.right", |c| c.relation(rr))?;
                if b == b2 {
                    Ok((a, c2))
                } else {
                    Err(self.err(
                        RelationEndpointMismatch,
                        format!("composition meets at {b} and {b2}"),
                    ))
                }
            }
            RelExpr::Union(l, rr) | RelExpr::Intersect(l, rr) | RelExpr::Diff(l, rr) => {
                let op = match r {
                    RelExpr::Union(..) => "union",
                    RelExpr::Intersect(..) => "intersect",
                    _ => "diff",
                };
                let lt = self.at(format!("{op}.left"), |c| c.relation(l))?;
                let rt = self.at(format!("{op}.right"), |c| c.relation(rr))?;
                if lt == rt {
                    Ok(lt)
                } else {
                    Err(self.err(
                        RelationEndpointMismatch,
                        format!("{op} of ({},{}) and ({},{})", lt.0, lt.1, rt.0, rt.1),
                    ))
                }
            }
        }
    }

    fn prop(&mut self, ctx: &Context, f: &PropExpr) -> Result<(), TypeError> {
        use TypeErrorKind::*;
        match f {
            PropExpr::Pred { name, args } => self.at(format!("pred({name})"), |c| {
                c.predicate(ctx, f, name, args)
            }),
            PropExpr::Not(inner) => self.at("not", |c| c.prop(ctx, inner)),
            PropExpr::And(l, r) => {
                self.at("and.left", |c| c.prop(ctx, l))?;
                self.at("and.right", |c| c.prop(ctx, r))
            }
            PropExpr::ForallIn { var, domain, body } => self.at("forall", |c| {
                let t = c.at("domain", |c| c.query(ctx, domain))?;
                let t = match t {
                    GeneralType::Set(t) => t,
                    other => {
                        return Err(c.at("domain", |c| {
                            c.err(TypeMismatch, format!("quantifier domain has type {other}, expected a set"))
                        }))
                    }
                };
                let inner = ctx.extend(var.clone(), t);
                c.at("body", |c| c.prop(&inner, body))
            }),
        }
    }

    fn predicate(
        &mut self,
        ctx: &Context,
        node: &PropExpr,
        name: &PredName,
        args: &[QueryExpr],
    ) -> Result<(), TypeError> {
        use TypeErrorKind::*;
        let tys = self.arg_types(ctx, args)?;
        if self.sig.has_predefined() {
            if let Some(p) = sugar::predefined_predicate(name.as_str()) {
                sugar::predefined_predicate_check(p, &tys).map_err(|(k, m)| self.err(k, m))?;
                self.record_predicate(node, Resolved::Predefined(p));
                return Ok(());
            }
        }
        let profiles = self.sig.predicate(name);
        if profiles.is_empty() {
            return Err(self.err(UnknownSymbol, format!("{name} is not a declared predicate")));
        }
        let mut matches = profiles.iter().enumerate().filter(|(_, p)| **p == tys);
        let Some((idx, _)) = matches.next() else {
            return Err(if profiles.iter().all(|p| p.len() != tys.len()) {
                self.err(ArityMismatch, format!("{name} applied to {} arguments", tys.len()))
            } else {
                self.err(TypeMismatch, format!("no overload of {name} accepts ({})", join(&tys)))
            });
        };
        if matches.next().is_some() {
            return Err(self.err(OverloadAmbiguous, format!("{name} is ambiguous")));
        }
        self.record_predicate(node, Resolved::Declared(idx));
        Ok(())
    }
}

fn join(tys: &[GeneralType]) -> String {
    tys.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(", ")
}
