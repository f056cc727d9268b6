//! Syntactic object queries over a head-keyed subterm index.
//!
//! A query `OMBIND(free, [X₁,…,Xₙ], P)` treats the `Xᵢ` as metavariables.
//! A subobject `o` (occurring under binders `Γ`) is a hit when some
//! substitution `s` of the metavariables makes `P` alpha-equal to `o`.
//! Metavariables may be bound to objects mentioning variables of `Γ`, but
//! never to objects mentioning variables bound inside the match itself.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::library::Library;
use super::objects::subterms;
use crate::object::{Object, VarDecl, PAIR, SUBST};

/// Where a subobject was found.
#[derive(Clone, Debug)]
pub struct Entry {
    pub decl: String,
    pub scope: Vec<VarDecl>,
    pub object: Object,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum HeadKey {
    Sym(String),
    Var,
    Lit,
    Other,
}

fn key(o: &Object) -> HeadKey {
    match (o.head(), o) {
        (Some(h), _) => HeadKey::Sym(h.to_owned()),
        (None, Object::Omv(_)) => HeadKey::Var,
        (None, Object::Omlit { .. }) => HeadKey::Lit,
        _ => HeadKey::Other,
    }
}

/// All subobjects of constant types, definientia and view assignments,
/// bucketed by head.
#[derive(Clone, Debug, Default)]
pub struct SubtermIndex {
    entries: Vec<Entry>,
    by_head: HashMap<HeadKey, Vec<usize>>,
}

impl SubtermIndex {
    pub fn build(lib: &Library) -> Self {
        let mut idx = SubtermIndex::default();
        for c in lib.constants() {
            for o in c.ty.iter().chain(c.def.iter()) {
                idx.add(&c.uri, o);
            }
        }
        for v in lib.views() {
            for o in v.assignments.values() {
                idx.add(&v.uri, o);
            }
        }
        idx
    }

    fn add(&mut self, decl: &str, o: &Object) {
        for occ in subterms(o) {
            let i = self.entries.len();
            self.by_head.entry(key(occ.object)).or_default().push(i);
            self.entries.push(Entry {
                decl: decl.to_owned(),
                scope: occ.scope,
                object: occ.object.clone(),
            });
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    fn candidates(&self, pattern: &Object, metas: &[String]) -> Box<dyn Iterator<Item = &Entry> + '_> {
        let bucket = |k: HeadKey| -> Box<dyn Iterator<Item = &Entry> + '_> {
            match self.by_head.get(&k) {
                Some(ix) => Box::new(ix.iter().map(|&i| &self.entries[i])),
                None => Box::new(std::iter::empty()),
            }
        };
        match pattern {
            Object::Omv(x) if metas.contains(x) => Box::new(self.entries.iter()),
            Object::Omv(_) => bucket(HeadKey::Var),
            _ => match key(pattern) {
                // a metavariable in head position matches any head
                HeadKey::Other => Box::new(self.entries.iter()),
                k => bucket(k),
            },
        }
    }

    /// All `(declaration, hit, substitution)` triples, with hit and
    /// substitution closed over the hit's scope.
    pub fn unify(&self, query: &Object) -> BTreeSet<(String, Object, Object)> {
        let (meta_ctx, pattern) = query.open_free();
        let metas: Vec<String> = meta_ctx.iter().map(|d| d.name.clone()).collect();
        let mut out = BTreeSet::new();
        for e in self.candidates(pattern, &metas) {
            if let Some(s) = match_object(pattern, &metas, &e.object) {
                out.insert((
                    e.decl.clone(),
                    Object::close_over(e.scope.clone(), e.object.clone()),
                    Object::close_over(e.scope.clone(), encode_substitution(&s)),
                ));
            }
        }
        out
    }
}

/// Matches `pattern` against `target`, returning the metavariable bindings.
pub fn match_object(pattern: &Object, metas: &[String], target: &Object) -> Option<BTreeMap<String, Object>> {
    let mut m = Matcher {
        metas,
        subst: BTreeMap::new(),
    };
    if m.go(pattern, &mut Vec::new(), target, &mut Vec::new()) {
        Some(m.subst)
    } else {
        None
    }
}

struct Matcher<'a> {
    metas: &'a [String],
    subst: BTreeMap<String, Object>,
}

/// Distance of the innermost binding of `x` from the end of `bound`.
fn depth(bound: &[String], x: &str) -> Option<usize> {
    bound.iter().rev().position(|b| b == x)
}

impl Matcher<'_> {
    fn go(&mut self, p: &Object, pb: &mut Vec<String>, o: &Object, ob: &mut Vec<String>) -> bool {
        match p {
            Object::Omv(x) => {
                if let Some(d) = depth(pb, x) {
                    return matches!(o, Object::Omv(y) if depth(ob, y) == Some(d));
                }
                if self.metas.contains(x) {
                    if o.free_vars().iter().any(|v| ob.contains(v)) {
                        return false;
                    }
                    return match self.subst.get(x) {
                        Some(prev) => prev == o,
                        None => {
                            self.subst.insert(x.clone(), o.clone());
                            true
                        }
                    };
                }
                matches!(o, Object::Omv(y) if y == x && depth(ob, y).is_none())
            }
            Object::Oms(u) => matches!(o, Object::Oms(v) if u == v),
            Object::Omlit { .. } => p == o,
            Object::Oma(ph, pargs) => match o {
                Object::Oma(oh, oargs) if pargs.len() == oargs.len() => {
                    self.go(ph, pb, oh, ob)
                        && pargs.iter().zip(oargs).all(|(a, b)| self.go(a, pb, b, ob))
                }
                _ => false,
            },
            Object::Ombind {
                binder: pbind,
                ctx: pctx,
                body: pbody,
            } => match o {
                Object::Ombind {
                    binder: obind,
                    ctx: octx,
                    body: obody,
                } if pctx.len() == octx.len() => {
                    if !self.go(pbind, pb, obind, ob) {
                        return false;
                    }
                    let (pm, om) = (pb.len(), ob.len());
                    let mut ok = true;
                    for (pd, od) in pctx.iter().zip(octx) {
                        ok = match (&pd.ty, &od.ty) {
                            (None, None) => true,
                            (Some(a), Some(b)) => self.go(a, pb, b, ob),
                            _ => false,
                        };
                        if !ok {
                            break;
                        }
                        pb.push(pd.name.clone());
                        ob.push(od.name.clone());
                    }
                    ok = ok && self.go(pbody, pb, obody, ob);
                    pb.truncate(pm);
                    ob.truncate(om);
                    ok
                }
                _ => false,
            },
        }
    }
}

/// `OMA(subst, OMA(pair, OMV X, v), …)` sorted by variable, or `OMS(subst)`
/// when empty.
pub fn encode_substitution(s: &BTreeMap<String, Object>) -> Object {
    if s.is_empty() {
        return Object::sym(SUBST);
    }
    Object::app(
        Object::sym(SUBST),
        s.iter()
            .map(|(x, v)| Object::app(Object::sym(PAIR), vec![Object::var(x), v.clone()]))
            .collect(),
    )
}

/// Inverse of the encoding, after opening an outer free-binder.
pub fn decode_substitution(o: &Object) -> Option<(Vec<VarDecl>, BTreeMap<String, Object>)> {
    let (ctx, body) = o.open_free();
    let mut out = BTreeMap::new();
    match body {
        Object::Oms(u) if u == SUBST => {}
        Object::Oma(h, pairs) if h.is_symbol(SUBST) => {
            for p in pairs {
                match p {
                    Object::Oma(h, kv) if h.is_symbol(PAIR) && kv.len() == 2 => match &kv[0] {
                        Object::Omv(x) => {
                            out.insert(x.clone(), kv[1].clone());
                        }
                        _ => return None,
                    },
                    _ => return None,
                }
            }
        }
        _ => return None,
    }
    Some((ctx.to_vec(), out))
}

/// Capture-avoiding simultaneous substitution of free variables.
pub fn apply_substitution(o: &Object, s: &BTreeMap<String, Object>) -> Object {
    let avoid: BTreeSet<String> = s.values().flat_map(|v| v.free_vars()).collect();
    subst(o, s, &avoid)
}

fn subst(o: &Object, s: &BTreeMap<String, Object>, avoid: &BTreeSet<String>) -> Object {
    match o {
        Object::Omv(x) => s.get(x).cloned().unwrap_or_else(|| o.clone()),
        Object::Oms(_) | Object::Omlit { .. } => o.clone(),
        Object::Oma(h, args) => Object::Oma(
            Box::new(subst(h, s, avoid)),
            args.iter().map(|a| subst(a, s, avoid)).collect(),
        ),
        Object::Ombind { binder, ctx, body } => {
            let binder = subst(binder, s, avoid);
            let mut inner = s.clone();
            let mut renames: BTreeMap<String, Object> = BTreeMap::new();
            let mut new_ctx = Vec::with_capacity(ctx.len());
            let mut taken: BTreeSet<String> = avoid.clone();
            taken.extend(o.free_vars());
            for d in ctx {
                let ty = d.ty.as_ref().map(|t| subst(t, &merged(&inner, &renames), avoid));
                inner.remove(&d.name);
                renames.remove(&d.name);
                let name = if avoid.contains(&d.name) {
                    let fresh = fresh_name(&d.name, &taken);
                    renames.insert(d.name.clone(), Object::var(fresh.clone()));
                    fresh
                } else {
                    d.name.clone()
                };
                taken.insert(name.clone());
                new_ctx.push(VarDecl::new(name, ty));
            }
            let body = subst(body, &merged(&inner, &renames), avoid);
            Object::bind(binder, new_ctx, body)
        }
    }
}

fn merged(a: &BTreeMap<String, Object>, b: &BTreeMap<String, Object>) -> BTreeMap<String, Object> {
    let mut m = a.clone();
    m.extend(b.iter().map(|(k, v)| (k.clone(), v.clone())));
    m
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|n| !taken.contains(n))
        .expect("unbounded supply")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::FREE;

    fn s(u: &str) -> Object {
        Object::sym(u)
    }

    fn lib_with_def(def: Object) -> Library {
        let src = serde_json::json!({
            "theories": [{"uri": "urn:t?T", "constants": [{"uri": "c", "def": def}]}]
        });
        Library::from_json_str(&src.to_string()).unwrap()
    }

    #[test]
    fn metavariable_match() {
        let plus_aa = Object::app(s("plus"), vec![s("a"), s("a")]);
        let idx = SubtermIndex::build(&lib_with_def(plus_aa.clone()));
        let q = Object::bind(
            s(FREE),
            vec![VarDecl::new("X", None)],
            Object::app(s("plus"), vec![Object::var("X"), Object::var("X")]),
        );
        let hits = idx.unify(&q);
        assert_eq!(hits.len(), 1);
        let (decl, o, sub) = hits.into_iter().next().unwrap();
        assert_eq!(decl, "urn:t?T?c");
        assert_eq!(o, plus_aa);
        let (_, m) = decode_substitution(&sub).unwrap();
        assert_eq!(m.get("X"), Some(&s("a")));
    }

    #[test]
    fn nonlinear_pattern_needs_equal_subterms() {
        let idx = SubtermIndex::build(&lib_with_def(Object::app(s("plus"), vec![s("a"), s("b")])));
        let q = Object::bind(
            s(FREE),
            vec![VarDecl::new("X", None)],
            Object::app(s("plus"), vec![Object::var("X"), Object::var("X")]),
        );
        assert!(idx.unify(&q).is_empty());
    }

    #[test]
    fn ground_query_matches_alpha_equal_objects() {
        let lam = |x: &str| Object::bind(s("lam"), vec![VarDecl::new(x, None)], Object::var(x));
        let idx = SubtermIndex::build(&lib_with_def(Object::app(s("f"), vec![lam("x")])));
        let hits = idx.unify(&lam("y"));
        assert_eq!(hits.len(), 1);
        assert_eq!(hits.iter().next().unwrap().2, Object::sym(SUBST));
        assert!(idx.unify(&s("g")).is_empty());
    }

    #[test]
    fn metavariables_do_not_capture_bound_variables() {
        // lam x. f(x) against lam y. f(X): X would have to be the bound x
        let target = Object::bind(
            s("lam"),
            vec![VarDecl::new("x", None)],
            Object::app(s("f"), vec![Object::var("x")]),
        );
        let idx = SubtermIndex::build(&lib_with_def(target));
        let q = Object::bind(
            s(FREE),
            vec![VarDecl::new("X", None)],
            Object::bind(
                s("lam"),
                vec![VarDecl::new("y", None)],
                Object::app(s("f"), vec![Object::var("X")]),
            ),
        );
        assert!(idx.unify(&q).is_empty());
        // but f(X) alone matches f(x) found under the binder, in scope [x]
        let q = Object::bind(
            s(FREE),
            vec![VarDecl::new("X", None)],
            Object::app(s("f"), vec![Object::var("X")]),
        );
        let hits = idx.unify(&q);
        assert_eq!(hits.len(), 1);
        let (_, o, sub) = hits.into_iter().next().unwrap();
        let (ctx, m) = decode_substitution(&sub).unwrap();
        assert_eq!(ctx.len(), 1);
        let (_, pat) = q.open_free();
        assert_eq!(Object::close_over(ctx, apply_substitution(pat, &m)), o);
    }

    #[test]
    fn substitution_avoids_capture() {
        let o = Object::bind(s("lam"), vec![VarDecl::new("y", None)], Object::app(s("f"), vec![Object::var("X"), Object::var("y")]));
        let m = BTreeMap::from([("X".to_owned(), Object::var("y"))]);
        let r = apply_substitution(&o, &m);
        let expected = Object::bind(s("lam"), vec![VarDecl::new("z", None)], Object::app(s("f"), vec![Object::var("y"), Object::var("z")]));
        assert_eq!(r, expected);
    }

    #[test]
    fn empty_library_has_no_hits() {
        assert!(SubtermIndex::build(&Library::empty()).unify(&s("a")).is_empty());
    }
}
