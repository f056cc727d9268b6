//! Structural operations on objects: positional access, head search,
//! occurrence, and scope-aware subterm enumeration.

use crate::object::{Object, VarDecl, FREE};

/// The direct subobject at position `p`.
///
/// For an application, 0 is the head and `i ≥ 1` the `i`-th argument. For a
/// binding object, 1 is the binder and 2 the body, closed over the bound
/// context. An outer free-binder is looked through and its context kept.
pub fn subobjat(p: u32, o: &Object) -> Option<Object> {
    let (outer, inner) = o.open_free();
    if !outer.is_empty() {
        let sub = subobjat(p, inner)?;
        return Some(merge_free(outer.to_vec(), sub));
    }
    match o {
        Object::Oma(head, args) => match p {
            0 => Some((**head).clone()),
            i => args.get(i as usize - 1).cloned(),
        },
        Object::Ombind { binder, ctx, body } => match p {
            1 => Some((**binder).clone()),
            2 => Some(merge_free(ctx.clone(), (**body).clone())),
            _ => None,
        },
        _ => None,
    }
}

/// `free(outer, o)`, flattening when `o` is itself free-wrapped.
pub fn merge_free(mut outer: Vec<VarDecl>, o: Object) -> Object {
    match o {
        Object::Ombind { binder, ctx, body } if binder.is_symbol(FREE) => {
            outer.extend(ctx);
            Object::close_over(outer, *body)
        }
        other => Object::close_over(outer, other),
    }
}

/// A subobject together with the declarations of the binders around it,
/// outermost first.
#[derive(Clone, Debug)]
pub struct Occurrence<'a> {
    pub scope: Vec<VarDecl>,
    pub object: &'a Object,
    /// Head of an application or binder of a binding object.
    pub operator: bool,
}

impl Occurrence<'_> {
    /// The subobject closed over its scope.
    pub fn closed(&self) -> Object {
        Object::close_over(self.scope.clone(), self.object.clone())
    }
}

/// Every subobject of `o` including `o` itself, in pre-order. Binders,
/// context type attributions and bodies are all visited.
pub fn subterms(o: &Object) -> Vec<Occurrence<'_>> {
    let mut out = Vec::new();
    walk(o, false, &mut Vec::new(), &mut out);
    out
}

fn walk<'a>(o: &'a Object, operator: bool, scope: &mut Vec<VarDecl>, out: &mut Vec<Occurrence<'a>>) {
    out.push(Occurrence {
        scope: scope.clone(),
        object: o,
        operator,
    });
    match o {
        Object::Oms(_) | Object::Omv(_) | Object::Omlit { .. } => {}
        Object::Oma(head, args) => {
            walk(head, true, scope, out);
            for a in args {
                walk(a, false, scope, out);
            }
        }
        Object::Ombind { binder, ctx, body } => {
            walk(binder, true, scope, out);
            let mark = scope.len();
            for d in ctx {
                if let Some(t) = &d.ty {
                    walk(t, false, scope, out);
                }
                scope.push(d.clone());
            }
            walk(body, false, scope, out);
            scope.truncate(mark);
        }
    }
}

/// Subobjects with head `h`, each closed over the binders in scope. A
/// symbol in operator position is part of its parent, not a match itself.
pub fn subobjhead(o: &Object, h: &str) -> Vec<Object> {
    subterms(o)
        .into_iter()
        .filter(|occ| !occ.operator && occ.object.head() == Some(h))
        .map(|occ| occ.closed())
        .collect()
}

pub fn occurs(u: &str, o: &Object) -> bool {
    o.mentions(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(u: &str) -> Object {
        Object::sym(u)
    }

    #[test]
    fn subobjat_positions() {
        let o = Object::app(s("f"), vec![s("a"), s("b")]);
        assert_eq!(subobjat(0, &o), Some(s("f")));
        assert_eq!(subobjat(1, &o), Some(s("a")));
        assert_eq!(subobjat(2, &o), Some(s("b")));
        assert_eq!(subobjat(3, &o), None);
        assert_eq!(subobjat(3, &s("c")), None);
    }

    #[test]
    fn subobjat_body_is_closed() {
        let ctx = vec![VarDecl::new("x", Some(s("tau")))];
        let o = Object::bind(s("lam"), ctx.clone(), Object::var("x"));
        assert_eq!(subobjat(1, &o), Some(s("lam")));
        assert_eq!(
            subobjat(2, &o),
            Some(Object::bind(s(FREE), ctx, Object::var("x")))
        );
    }

    #[test]
    fn subobjat_merges_free_contexts() {
        let inner = Object::bind(s("lam"), vec![VarDecl::new("y", None)], Object::var("x"));
        let o = Object::close_over(vec![VarDecl::new("x", None)], inner);
        assert_eq!(
            subobjat(2, &o),
            Some(Object::bind(
                s(FREE),
                vec![VarDecl::new("x", None), VarDecl::new("y", None)],
                Object::var("x")
            ))
        );
        let o = Object::close_over(
            vec![VarDecl::new("x", None)],
            Object::app(s("f"), vec![Object::var("x")]),
        );
        assert_eq!(
            subobjat(1, &o),
            Some(Object::close_over(vec![VarDecl::new("x", None)], Object::var("x")))
        );
    }

    #[test]
    fn subobjhead_without_nesting() {
        let o = Object::app(s("h"), vec![s("a")]);
        assert_eq!(subobjhead(&o, "h"), vec![o.clone()]);
    }

    #[test]
    fn subobjhead_under_binder_is_wrapped() {
        let hx = Object::app(s("h"), vec![Object::var("x")]);
        let o = Object::bind(s("lam"), vec![VarDecl::new("x", Some(s("i")))], hx.clone());
        assert_eq!(
            subobjhead(&o, "h"),
            vec![Object::bind(s(FREE), vec![VarDecl::new("x", Some(s("i")))], hx)]
        );
        assert_eq!(subobjhead(&o, "lam"), vec![o.clone()]);
    }

    #[test]
    fn occurs_everywhere() {
        assert!(occurs("c", &s("c")));
        assert!(!occurs("c", &Object::var("x")));
        let o = Object::bind(s("b"), vec![VarDecl::new("x", Some(s("c")))], Object::var("x"));
        assert!(occurs("c", &o));
    }
}
