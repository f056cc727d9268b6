//! Type inference plugins for `typeof`, selected by theory.

use std::collections::HashMap;
use std::sync::Arc;

use super::library::Library;
use crate::object::{Object, VarDecl, FREE};

/// Function type former of the built-in simply-typed system:
/// `OMA(arrow, A₁, …, Aₙ, B)` is `A₁ → … → Aₙ → B`.
pub const ARROW: &str = "urn:qmt?stlc?arrow";
/// Lambda binder of the built-in simply-typed system; every bound variable
/// must carry a type.
pub const LAMBDA: &str = "urn:qmt?stlc?lambda";

/// Name under which theories select the built-in system.
pub const STLC: &str = "stlc";

pub trait TypeSystem: Send + Sync {
    /// The type of `o` in context `ctx`, or `None` if `o` is ill-typed.
    fn infer(&self, lib: &Library, ctx: &[VarDecl], o: &Object) -> Option<Object>;
}

#[derive(Clone, Default)]
pub struct Registry {
    systems: HashMap<String, Arc<dyn TypeSystem>>,
}

impl Registry {
    /// Plugins for every theory that names a known type system.
    pub fn for_library(lib: &Library) -> Self {
        let mut r = Registry::default();
        for t in lib.theories() {
            if t.typesystem.as_deref() == Some(STLC) {
                r.register(&t.uri, Arc::new(Stlc));
            }
        }
        r
    }

    pub fn register(&mut self, theory: &str, ts: Arc<dyn TypeSystem>) {
        self.systems.insert(theory.to_owned(), ts);
    }

    pub fn get(&self, theory: &str) -> Option<&Arc<dyn TypeSystem>> {
        self.systems.get(theory)
    }
}

/// Why `typeof` failed; both cases are the error value for evaluation.
#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum TypeofError {
    #[error("NoPluginForTheory: no type system is registered for {0}")]
    NoPluginForTheory(String),
    #[error("object is ill-typed")]
    IllTyped,
}

/// Infers the type of `o` relative to `theory`; an outer free-binder
/// supplies the typing context.
pub fn typeof_(reg: &Registry, lib: &Library, theory: &str, o: &Object) -> Result<Object, TypeofError> {
    let ts = reg
        .get(theory)
        .ok_or_else(|| TypeofError::NoPluginForTheory(theory.to_owned()))?;
    let (ctx, body) = o.open_free();
    ts.infer(lib, ctx, body).ok_or(TypeofError::IllTyped)
}

/// Simply-typed lambda calculus over the constants' declared types.
pub struct Stlc;

/// Right-nested arrows flattened: `A → (B → C)` becomes `OMA(arrow, A, B, C)`.
fn normalize(t: &Object) -> Object {
    match t {
        Object::Oma(h, args) if h.is_symbol(ARROW) && args.len() >= 2 => {
            let mut flat: Vec<Object> = args[..args.len() - 1].iter().map(normalize).collect();
            match normalize(&args[args.len() - 1]) {
                Object::Oma(h2, rest) if h2.is_symbol(ARROW) => flat.extend(rest),
                last => flat.push(last),
            }
            Object::app(Object::sym(ARROW), flat)
        }
        other => other.clone(),
    }
}

/// `(A, B)` for `A → B`, with `B` itself an arrow when more domains remain.
fn split(t: &Object) -> Option<(Object, Object)> {
    match t {
        Object::Oma(h, args) if h.is_symbol(ARROW) && args.len() >= 2 => {
            let dom = args[0].clone();
            let cod = if args.len() == 2 {
                args[1].clone()
            } else {
                Object::app(Object::sym(ARROW), args[1..].to_vec())
            };
            Some((dom, cod))
        }
        _ => None,
    }
}

impl Stlc {
    fn go(&self, lib: &Library, ctx: &mut Vec<VarDecl>, o: &Object) -> Option<Object> {
        match o {
            Object::Omv(x) => ctx
                .iter()
                .rev()
                .find(|d| &d.name == x)
                .and_then(|d| d.ty.as_ref())
                .map(normalize),
            Object::Oms(c) => lib.constant(c)?.ty.as_ref().map(normalize),
            Object::Oma(f, args) => {
                let mut t = self.go(lib, ctx, f)?;
                for a in args {
                    let (dom, cod) = split(&t)?;
                    let ta = self.go(lib, ctx, a)?;
                    if normalize(&dom) != ta {
                        return None;
                    }
                    t = normalize(&cod);
                }
                Some(t)
            }
            Object::Ombind { binder, ctx: bound, body } => {
                let is_lambda = binder.is_symbol(LAMBDA);
                if !is_lambda && !binder.is_symbol(FREE) {
                    return None;
                }
                if is_lambda && bound.iter().any(|d| d.ty.is_none()) {
                    return None;
                }
                let mark = ctx.len();
                ctx.extend(bound.iter().cloned());
                let body_ty = self.go(lib, ctx, body);
                ctx.truncate(mark);
                let body_ty = body_ty?;
                if !is_lambda {
                    return Some(body_ty);
                }
                let mut parts: Vec<Object> = bound.iter().map(|d| d.ty.clone().unwrap()).collect();
                parts.push(body_ty);
                Some(normalize(&Object::app(Object::sym(ARROW), parts)))
            }
            Object::Omlit { .. } => None,
        }
    }
}

impl TypeSystem for Stlc {
    fn infer(&self, lib: &Library, ctx: &[VarDecl], o: &Object) -> Option<Object> {
        self.go(lib, &mut ctx.to_vec(), o)
    }
}
