//! OpenMath-style objects compared up to alpha-equality.
//!
//! Bound variable names never influence `Eq`, `Ord` or `Hash`: all three
//! traverse both objects with a binder stack and compare variables by their
//! de Bruijn position when bound and by name when free. This makes objects
//! usable directly as set elements and map keys.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// Reserved binder that closes an object over its free variables.
pub const FREE: &str = "urn:qmt?core?free";
/// Head of an encoded substitution.
pub const SUBST: &str = "urn:qmt?core?subst";
/// Head of one `variable := value` pair inside an encoded substitution.
pub const PAIR: &str = "urn:qmt?core?pair";

/// A variable declaration in a binder context, with an optional type attribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    pub ty: Option<Object>,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, ty: Option<Object>) -> Self {
        VarDecl {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Object {
    Oms(String),
    Omv(String),
    /// Application; `args` is never empty.
    Oma(Box<Object>, Vec<Object>),
    Ombind {
        binder: Box<Object>,
        ctx: Vec<VarDecl>,
        body: Box<Object>,
    },
    Omlit { kind: String, value: String },
}

impl Object {
    pub fn sym(uri: impl Into<String>) -> Object {
        Object::Oms(uri.into())
    }

    pub fn var(name: impl Into<String>) -> Object {
        Object::Omv(name.into())
    }

    /// Application. Panics if `args` is empty.
    pub fn app(head: Object, args: Vec<Object>) -> Object {
        assert!(!args.is_empty(), "OMA requires at least one argument");
        Object::Oma(Box::new(head), args)
    }

    pub fn bind(binder: Object, ctx: Vec<VarDecl>, body: Object) -> Object {
        Object::Ombind {
            binder: Box::new(binder),
            ctx,
            body: Box::new(body),
        }
    }

    pub fn lit(kind: impl Into<String>, value: impl Into<String>) -> Object {
        Object::Omlit {
            kind: kind.into(),
            value: value.into(),
        }
    }

    /// `OMBIND(OMS(free), ctx, body)`, or `body` itself when `ctx` is empty.
    pub fn close_over(ctx: Vec<VarDecl>, body: Object) -> Object {
        if ctx.is_empty() {
            body
        } else {
            Object::bind(Object::sym(FREE), ctx, body)
        }
    }

    /// Splits off an outer free-binder, returning its context and the body.
    pub fn open_free(&self) -> (&[VarDecl], &Object) {
        match self {
            Object::Ombind { binder, ctx, body } if binder.is_symbol(FREE) => (ctx, body),
            _ => (&[], self),
        }
    }

    pub fn is_symbol(&self, uri: &str) -> bool {
        matches!(self, Object::Oms(u) if u == uri)
    }

    /// The head symbol: an `OMS` itself, the head of an application, or a binder symbol.
    pub fn head(&self) -> Option<&str> {
        match self {
            Object::Oms(u) => Some(u),
            Object::Oma(h, _) => match h.as_ref() {
                Object::Oms(u) => Some(u),
                _ => None,
            },
            Object::Ombind { binder, .. } => match binder.as_ref() {
                Object::Oms(u) => Some(u),
                _ => None,
            },
            _ => None,
        }
    }

    /// All symbol URIs occurring anywhere, including binder contexts.
    pub fn symbols(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Object::Oms(u) => out.push(u),
            Object::Omv(_) | Object::Omlit { .. } => {}
            Object::Oma(h, args) => {
                h.collect_symbols(out);
                for a in args {
                    a.collect_symbols(out);
                }
            }
            Object::Ombind { binder, ctx, body } => {
                binder.collect_symbols(out);
                for d in ctx {
                    if let Some(t) = &d.ty {
                        t.collect_symbols(out);
                    }
                }
                body.collect_symbols(out);
            }
        }
    }

    pub fn mentions(&self, uri: &str) -> bool {
        match self {
            Object::Oms(u) => u == uri,
            Object::Omv(_) | Object::Omlit { .. } => false,
            Object::Oma(h, args) => h.mentions(uri) || args.iter().any(|a| a.mentions(uri)),
            Object::Ombind { binder, ctx, body } => {
                binder.mentions(uri)
                    || ctx
                        .iter()
                        .any(|d| d.ty.as_ref().is_some_and(|t| t.mentions(uri)))
                    || body.mentions(uri)
            }
        }
    }

    /// Free variable names, in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Object::Omv(x) => {
                if !bound.iter().any(|b| b == x) && !out.contains(x) {
                    out.push(x.clone());
                }
            }
            Object::Oms(_) | Object::Omlit { .. } => {}
            Object::Oma(h, args) => {
                h.collect_free(bound, out);
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            Object::Ombind { binder, ctx, body } => {
                binder.collect_free(bound, out);
                let mark = bound.len();
                for d in ctx {
                    if let Some(t) = &d.ty {
                        t.collect_free(bound, out);
                    }
                    bound.push(d.name.clone());
                }
                body.collect_free(bound, out);
                bound.truncate(mark);
            }
        }
    }

    /// Number of nodes; used for size limits in tests and generators.
    pub fn size(&self) -> usize {
        match self {
            Object::Oms(_) | Object::Omv(_) | Object::Omlit { .. } => 1,
            Object::Oma(h, args) => 1 + h.size() + args.iter().map(Object::size).sum::<usize>(),
            Object::Ombind { binder, ctx, body } => {
                1 + binder.size()
                    + ctx
                        .iter()
                        .map(|d| d.ty.as_ref().map_or(0, Object::size))
                        .sum::<usize>()
                    + body.size()
            }
        }
    }
}

// ---------------------------------------------------------------------------
// alpha-equality

#[derive(PartialEq, Eq, PartialOrd, Ord, Hash)]
enum VarRef<'a> {
    Bound(usize),
    Free(&'a str),
}

fn resolve<'a>(env: &[&'a str], name: &'a str) -> VarRef<'a> {
    match env.iter().rposition(|b| *b == name) {
        Some(pos) => VarRef::Bound(env.len() - 1 - pos),
        None => VarRef::Free(name),
    }
}

fn rank(o: &Object) -> u8 {
    match o {
        Object::Oms(_) => 0,
        Object::Omv(_) => 1,
        Object::Oma(..) => 2,
        Object::Ombind { .. } => 3,
        Object::Omlit { .. } => 4,
    }
}

fn alpha_cmp<'a, 'b>(
    a: &'a Object,
    ea: &mut Vec<&'a str>,
    b: &'b Object,
    eb: &mut Vec<&'b str>,
) -> Ordering {
    match (a, b) {
        (Object::Oms(x), Object::Oms(y)) => x.cmp(y),
        (Object::Omv(x), Object::Omv(y)) => {
            let rx = resolve(ea, x);
            let ry = resolve(eb, y);
            match (rx, ry) {
                (VarRef::Bound(i), VarRef::Bound(j)) => i.cmp(&j),
                (VarRef::Bound(_), VarRef::Free(_)) => Ordering::Less,
                (VarRef::Free(_), VarRef::Bound(_)) => Ordering::Greater,
                (VarRef::Free(x), VarRef::Free(y)) => x.cmp(y),
            }
        }
        (Object::Oma(h1, a1), Object::Oma(h2, a2)) => a1
            .len()
            .cmp(&a2.len())
            .then_with(|| alpha_cmp(h1, ea, h2, eb))
            .then_with(|| {
                for (x, y) in a1.iter().zip(a2) {
                    let c = alpha_cmp(x, ea, y, eb);
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                Ordering::Equal
            }),
        (
            Object::Ombind {
                binder: b1,
                ctx: c1,
                body: d1,
            },
            Object::Ombind {
                binder: b2,
                ctx: c2,
                body: d2,
            },
        ) => {
            let c = c1
                .len()
                .cmp(&c2.len())
                .then_with(|| alpha_cmp(b1, ea, b2, eb));
            if c != Ordering::Equal {
                return c;
            }
            let (ma, mb) = (ea.len(), eb.len());
            let mut result = Ordering::Equal;
            for (x, y) in c1.iter().zip(c2) {
                result = match (&x.ty, &y.ty) {
                    (None, None) => Ordering::Equal,
                    (None, Some(_)) => Ordering::Less,
                    (Some(_), None) => Ordering::Greater,
                    (Some(t1), Some(t2)) => alpha_cmp(t1, ea, t2, eb),
                };
                if result != Ordering::Equal {
                    break;
                }
                ea.push(&x.name);
                eb.push(&y.name);
            }
            if result == Ordering::Equal {
                result = alpha_cmp(d1, ea, d2, eb);
            }
            ea.truncate(ma);
            eb.truncate(mb);
            result
        }
        (
            Object::Omlit { kind: k1, value: v1 },
            Object::Omlit { kind: k2, value: v2 },
        ) => k1.cmp(k2).then_with(|| v1.cmp(v2)),
        _ => rank(a).cmp(&rank(b)),
    }
}

fn alpha_hash<'a, H: Hasher>(o: &'a Object, env: &mut Vec<&'a str>, h: &mut H) {
    rank(o).hash(h);
    match o {
        Object::Oms(u) => u.hash(h),
        Object::Omv(x) => resolve(env, x).hash(h),
        Object::Oma(head, args) => {
            args.len().hash(h);
            alpha_hash(head, env, h);
            for a in args {
                alpha_hash(a, env, h);
            }
        }
        Object::Ombind { binder, ctx, body } => {
            ctx.len().hash(h);
            alpha_hash(binder, env, h);
            let mark = env.len();
            for d in ctx {
                match &d.ty {
                    None => 0u8.hash(h),
                    Some(t) => {
                        1u8.hash(h);
                        alpha_hash(t, env, h);
                    }
                }
                env.push(&d.name);
            }
            alpha_hash(body, env, h);
            env.truncate(mark);
        }
        Object::Omlit { kind, value } => {
            kind.hash(h);
            value.hash(h);
        }
    }
}

impl PartialEq for Object {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Object {}

impl PartialOrd for Object {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Object {
    fn cmp(&self, other: &Self) -> Ordering {
        alpha_cmp(self, &mut Vec::new(), other, &mut Vec::new())
    }
}

impl Hash for Object {
    fn hash<H: Hasher>(&self, state: &mut H) {
        alpha_hash(self, &mut Vec::new(), state)
    }
}

// ---------------------------------------------------------------------------
// interchange format

#[derive(Serialize, Deserialize)]
enum Term {
    #[serde(rename = "OMS")]
    Oms(String),
    #[serde(rename = "OMV")]
    Omv(String),
    #[serde(rename = "OMA")]
    Oma(Vec<Object>),
    #[serde(rename = "OMBIND")]
    Ombind {
        binder: Object,
        ctx: Vec<VarDecl>,
        body: Object,
    },
    #[serde(rename = "OMLIT")]
    Omlit { kind: String, value: String },
}

impl Serialize for Object {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let term = match self.clone() {
            Object::Oms(u) => Term::Oms(u),
            Object::Omv(x) => Term::Omv(x),
            Object::Oma(h, args) => {
                let mut v = Vec::with_capacity(args.len() + 1);
                v.push(*h);
                v.extend(args);
                Term::Oma(v)
            }
            Object::Ombind { binder, ctx, body } => Term::Ombind {
                binder: *binder,
                ctx,
                body: *body,
            },
            Object::Omlit { kind, value } => Term::Omlit { kind, value },
        };
        term.serialize(s)
    }
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

impl<'de> Deserialize<'de> for Object {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(match Term::deserialize(d)? {
            Term::Oms(u) => Object::Oms(u),
            Term::Omv(x) => Object::Omv(x),
            Term::Oma(mut v) => {
                if v.len() < 2 {
                    return Err(serde::de::Error::custom(
                        "OMA needs a head and at least one argument",
                    ));
                }
                let head = v.remove(0);
                Object::Oma(Box::new(head), v)
            }
            Term::Ombind { binder, ctx, body } => Object::bind(binder, ctx, body),
            Term::Omlit { kind, value } => match kind.as_str() {
                "string" => Object::Omlit { kind, value },
                "integer" if is_integer(&value) => Object::Omlit { kind, value },
                "integer" => {
                    return Err(serde::de::Error::custom(format!("{value:?} is not an integer")))
                }
                other => {
                    return Err(serde::de::Error::custom(format!(
                        "literal kind must be integer or string, not {other:?}"
                    )))
                }
            },
        })
    }
}

impl Object {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("objects always serialize")
    }
}

/// Compact human-readable form used by the text result format.
impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Oms(u) => write!(f, "{u}"),
            Object::Omv(x) => write!(f, "${x}"),
            Object::Oma(h, args) => {
                write!(f, "{h}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Object::Ombind { binder, ctx, body } => {
                write!(f, "{binder}[")?;
                for (i, d) in ctx.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "${}", d.name)?;
                    if let Some(t) = &d.ty {
                        write!(f, ": {t}")?;
                    }
                }
                write!(f, "].{body}")
            }
            Object::Omlit { kind, value } => match kind.as_str() {
                "string" => write!(f, "{value:?}"),
                _ => write!(f, "{value}"),
            },
        }
    }
}
