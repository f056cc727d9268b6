//! Relation, proposition and query expressions.

use std::collections::BTreeSet;

use super::names::{BaseTypeName, ConceptName, FunName, PredName, RelationName, VarName};
use crate::object::Object;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RelExpr {
    Atomic(RelationName),
    Inverse(Box<RelExpr>),
    /// Strict transitive closure.
    TransClosure(Box<RelExpr>),
    Compose(Box<RelExpr>, Box<RelExpr>),
    Union(Box<RelExpr>, Box<RelExpr>),
    Intersect(Box<RelExpr>, Box<RelExpr>),
    Diff(Box<RelExpr>, Box<RelExpr>),
}

impl RelExpr {
    pub fn atom(r: impl Into<RelationName>) -> RelExpr {
        RelExpr::Atomic(r.into())
    }

    pub fn inv(self) -> RelExpr {
        RelExpr::Inverse(Box::new(self))
    }

    pub fn plus(self) -> RelExpr {
        RelExpr::TransClosure(Box::new(self))
    }

    pub fn then(self, other: RelExpr) -> RelExpr {
        RelExpr::Compose(Box::new(self), Box::new(other))
    }

    pub fn union(self, other: RelExpr) -> RelExpr {
        RelExpr::Union(Box::new(self), Box::new(other))
    }

    pub fn intersect(self, other: RelExpr) -> RelExpr {
        RelExpr::Intersect(Box::new(self), Box::new(other))
    }

    pub fn minus(self, other: RelExpr) -> RelExpr {
        RelExpr::Diff(Box::new(self), Box::new(other))
    }

    pub fn depth(&self) -> usize {
        match self {
            RelExpr::Atomic(_) => 0,
            RelExpr::Inverse(r) | RelExpr::TransClosure(r) => 1 + r.depth(),
            RelExpr::Compose(a, b)
            | RelExpr::Union(a, b)
            | RelExpr::Intersect(a, b)
            | RelExpr::Diff(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

/// Payload of a literal: the concrete syntax carries strings and objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LiteralValue {
    Str(String),
    Obj(Object),
}

/// A literal element of a base type, e.g. a URI or an object. Literals are
/// nullary constants interpreted as themselves when they belong to the
/// model's universe.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub base: BaseTypeName,
    pub value: LiteralValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PropExpr {
    Pred {
        name: PredName,
        args: Vec<QueryExpr>,
    },
    Not(Box<PropExpr>),
    And(Box<PropExpr>, Box<PropExpr>),
    ForallIn {
        var: VarName,
        domain: Box<QueryExpr>,
        body: Box<PropExpr>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum QueryExpr {
    Concept(ConceptName),
    Var(VarName),
    Literal(Literal),
    Apply {
        fun: FunName,
        /// Member of an indexed function family, e.g. the `2` in `subobjat_2`.
        index: Option<u32>,
        args: Vec<QueryExpr>,
    },
    Tuple(Vec<QueryExpr>),
    /// 1-based projection.
    Proj(Box<QueryExpr>, usize),
    Image(RelExpr, Box<QueryExpr>),
    BigUnion {
        var: VarName,
        domain: Box<QueryExpr>,
        body: Box<QueryExpr>,
    },
    Comprehension {
        var: VarName,
        domain: Box<QueryExpr>,
        filter: Box<PropExpr>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("renaming {old} to {new} would capture a variable")]
pub struct CaptureError {
    pub old: VarName,
    pub new: VarName,
}

impl QueryExpr {
    pub fn concept(c: impl Into<ConceptName>) -> Self {
        QueryExpr::Concept(c.into())
    }

    pub fn var(x: impl Into<VarName>) -> Self {
        QueryExpr::Var(x.into())
    }

    pub fn apply(f: impl Into<FunName>, args: Vec<QueryExpr>) -> Self {
        QueryExpr::Apply {
            fun: f.into(),
            index: None,
            args,
        }
    }

    pub fn apply_indexed(f: impl Into<FunName>, index: u32, args: Vec<QueryExpr>) -> Self {
        QueryExpr::Apply {
            fun: f.into(),
            index: Some(index),
            args,
        }
    }

    pub fn uri(base: impl Into<BaseTypeName>, u: impl Into<String>) -> Self {
        QueryExpr::Literal(Literal {
            base: base.into(),
            value: LiteralValue::Str(u.into()),
        })
    }

    pub fn obj(base: impl Into<BaseTypeName>, o: Object) -> Self {
        QueryExpr::Literal(Literal {
            base: base.into(),
            value: LiteralValue::Obj(o),
        })
    }

    pub fn proj(self, i: usize) -> Self {
        QueryExpr::Proj(Box::new(self), i)
    }

    pub fn image(r: RelExpr, q: QueryExpr) -> Self {
        QueryExpr::Image(r, Box::new(q))
    }

    pub fn big_union(x: impl Into<VarName>, domain: QueryExpr, body: QueryExpr) -> Self {
        QueryExpr::BigUnion {
            var: x.into(),
            domain: Box::new(domain),
            body: Box::new(body),
        }
    }

    pub fn comprehension(x: impl Into<VarName>, domain: QueryExpr, filter: PropExpr) -> Self {
        QueryExpr::Comprehension {
            var: x.into(),
            domain: Box::new(domain),
            filter: Box::new(filter),
        }
    }

    /// Variables occurring outside any binder for them.
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a VarName>, out: &mut BTreeSet<VarName>) {
        match self {
            QueryExpr::Concept(_) | QueryExpr::Literal(_) => {}
            QueryExpr::Var(x) => {
                if !bound.contains(&x) {
                    out.insert(x.clone());
                }
            }
            QueryExpr::Apply { args, .. } | QueryExpr::Tuple(args) => {
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            QueryExpr::Proj(q, _) | QueryExpr::Image(_, q) => q.collect_free(bound, out),
            QueryExpr::BigUnion { var, domain, body } => {
                domain.collect_free(bound, out);
                bound.push(var);
                body.collect_free(bound, out);
                bound.pop();
            }
            QueryExpr::Comprehension {
                var,
                domain,
                filter,
            } => {
                domain.collect_free(bound, out);
                bound.push(var);
                filter.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Renames the variable `old` to `new`: free occurrences and binders
    /// named `old` alike. Fails if `new` is free in `self` or if a renamed
    /// occurrence would fall under a binder named `new`.
    pub fn alpha_rename(&self, old: &VarName, new: &VarName) -> Result<QueryExpr, CaptureError> {
        if old == new {
            return Ok(self.clone());
        }
        if self.free_vars().contains(new) {
            return Err(CaptureError {
                old: old.clone(),
                new: new.clone(),
            });
        }
        self.rename(old, new)
    }

    fn rename(&self, old: &VarName, new: &VarName) -> Result<QueryExpr, CaptureError> {
        let capture = || CaptureError {
            old: old.clone(),
            new: new.clone(),
        };
        Ok(match self {
            QueryExpr::Var(x) if x == old => QueryExpr::Var(new.clone()),
            QueryExpr::Concept(_) | QueryExpr::Var(_) | QueryExpr::Literal(_) => self.clone(),
            QueryExpr::Apply { fun, index, args } => QueryExpr::Apply {
                fun: fun.clone(),
                index: *index,
                args: args
                    .iter()
                    .map(|a| a.rename(old, new))
                    .collect::<Result<_, _>>()?,
            },
            QueryExpr::Tuple(args) => QueryExpr::Tuple(
                args.iter()
                    .map(|a| a.rename(old, new))
                    .collect::<Result<_, _>>()?,
            ),
            QueryExpr::Proj(q, i) => QueryExpr::Proj(Box::new(q.rename(old, new)?), *i),
            QueryExpr::Image(r, q) => QueryExpr::Image(r.clone(), Box::new(q.rename(old, new)?)),
            QueryExpr::BigUnion { var, domain, body } => {
                let domain = domain.rename(old, new)?;
                let (var, body) = if var == old {
                    (new.clone(), body.rename(old, new)?)
                } else if var == new {
                    if body.free_vars().contains(old) {
                        return Err(capture());
                    }
                    (var.clone(), (**body).clone())
                } else {
                    (var.clone(), body.rename(old, new)?)
                };
                QueryExpr::big_union(var, domain, body)
            }
            QueryExpr::Comprehension {
                var,
                domain,
                filter,
            } => {
                let domain = domain.rename(old, new)?;
                let (var, filter) = if var == old {
                    (new.clone(), filter.rename(old, new)?)
                } else if var == new {
                    if filter.free_vars().contains(old) {
                        return Err(capture());
                    }
                    (var.clone(), (**filter).clone())
                } else {
                    (var.clone(), filter.rename(old, new)?)
                };
                QueryExpr::comprehension(var, domain, filter)
            }
        })
    }

    /// Capture-avoiding substitution of `replacement` for free occurrences of `x`.
    pub fn subst(&self, x: &VarName, replacement: &QueryExpr) -> QueryExpr {
        let fv = replacement.free_vars();
        self.subst_with(x, replacement, &fv)
    }

    fn subst_with(&self, x: &VarName, rep: &QueryExpr, fv: &BTreeSet<VarName>) -> QueryExpr {
        match self {
            QueryExpr::Var(y) if y == x => rep.clone(),
            QueryExpr::Concept(_) | QueryExpr::Var(_) | QueryExpr::Literal(_) => self.clone(),
            QueryExpr::Apply { fun, index, args } => QueryExpr::Apply {
                fun: fun.clone(),
                index: *index,
                args: args.iter().map(|a| a.subst_with(x, rep, fv)).collect(),
            },
            QueryExpr::Tuple(args) => {
                QueryExpr::Tuple(args.iter().map(|a| a.subst_with(x, rep, fv)).collect())
            }
            QueryExpr::Proj(q, i) => QueryExpr::Proj(Box::new(q.subst_with(x, rep, fv)), *i),
            QueryExpr::Image(r, q) => {
                QueryExpr::Image(r.clone(), Box::new(q.subst_with(x, rep, fv)))
            }
            QueryExpr::BigUnion { var, domain, body } => {
                let domain = domain.subst_with(x, rep, fv);
                if var == x || !body.free_vars().contains(x) {
                    return QueryExpr::big_union(var.clone(), domain, (**body).clone());
                }
                let (var, body) = freshen_query(var, body, fv);
                QueryExpr::big_union(var, domain, body.subst_with(x, rep, fv))
            }
            QueryExpr::Comprehension {
                var,
                domain,
                filter,
            } => {
                let domain = domain.subst_with(x, rep, fv);
                if var == x || !filter.free_vars().contains(x) {
                    return QueryExpr::comprehension(var.clone(), domain, (**filter).clone());
                }
                let (var, filter) = freshen_prop(var, filter, fv);
                QueryExpr::comprehension(var, domain, filter.subst_with(x, rep, fv))
            }
        }
    }
}

fn freshen_query(var: &VarName, body: &QueryExpr, avoid: &BTreeSet<VarName>) -> (VarName, QueryExpr) {
    if !avoid.contains(var) {
        return (var.clone(), body.clone());
    }
    let mut taken = avoid.clone();
    taken.extend(body.free_vars());
    let fresh = fresh_var(var.as_str(), &taken);
    let body = body.rename(var, &fresh).expect("fresh name cannot capture");
    (fresh, body)
}

fn freshen_prop(var: &VarName, body: &PropExpr, avoid: &BTreeSet<VarName>) -> (VarName, PropExpr) {
    if !avoid.contains(var) {
        return (var.clone(), body.clone());
    }
    let mut taken = avoid.clone();
    taken.extend(body.free_vars());
    let fresh = fresh_var(var.as_str(), &taken);
    let body = body.rename(var, &fresh).expect("fresh name cannot capture");
    (fresh, body)
}

/// The first of `base`, `base1`, `base2`, … not in `taken`.
pub fn fresh_var(base: &str, taken: &BTreeSet<VarName>) -> VarName {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "v" } else { stem };
    if !taken.iter().any(|t| t.as_str() == base) {
        return VarName::new(base);
    }
    (1..)
        .map(|i| VarName::new(format!("{stem}{i}")))
        .find(|v| !taken.contains(v))
        .expect("infinitely many candidates")
}

impl PropExpr {
    pub fn pred(p: impl Into<PredName>, args: Vec<QueryExpr>) -> Self {
        PropExpr::Pred {
            name: p.into(),
            args,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        PropExpr::Not(Box::new(self))
    }

    pub fn and(self, other: PropExpr) -> Self {
        PropExpr::And(Box::new(self), Box::new(other))
    }

    pub fn forall(x: impl Into<VarName>, domain: QueryExpr, body: PropExpr) -> Self {
        PropExpr::ForallIn {
            var: x.into(),
            domain: Box::new(domain),
            body: Box::new(body),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free<'a>(&'a self, bound: &mut Vec<&'a VarName>, out: &mut BTreeSet<VarName>) {
        match self {
            PropExpr::Pred { args, .. } => {
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            PropExpr::Not(f) => f.collect_free(bound, out),
            PropExpr::And(f, g) => {
                f.collect_free(bound, out);
                g.collect_free(bound, out);
            }
            PropExpr::ForallIn { var, domain, body } => {
                domain.collect_free(bound, out);
                bound.push(var);
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// See [`QueryExpr::alpha_rename`].
    pub fn alpha_rename(&self, old: &VarName, new: &VarName) -> Result<PropExpr, CaptureError> {
        if old == new {
            return Ok(self.clone());
        }
        if self.free_vars().contains(new) {
            return Err(CaptureError {
                old: old.clone(),
                new: new.clone(),
            });
        }
        self.rename(old, new)
    }

    fn rename(&self, old: &VarName, new: &VarName) -> Result<PropExpr, CaptureError> {
        Ok(match self {
            PropExpr::Pred { name, args } => PropExpr::Pred {
                name: name.clone(),
                args: args
                    .iter()
                    .map(|a| a.rename(old, new))
                    .collect::<Result<_, _>>()?,
            },
            PropExpr::Not(f) => PropExpr::Not(Box::new(f.rename(old, new)?)),
            PropExpr::And(f, g) => {
                PropExpr::And(Box::new(f.rename(old, new)?), Box::new(g.rename(old, new)?))
            }
            PropExpr::ForallIn { var, domain, body } => {
                let domain = domain.rename(old, new)?;
                let (var, body) = if var == old {
                    (new.clone(), body.rename(old, new)?)
                } else if var == new {
                    if body.free_vars().contains(old) {
                        return Err(CaptureError {
                            old: old.clone(),
                            new: new.clone(),
                        });
                    }
                    (var.clone(), (**body).clone())
                } else {
                    (var.clone(), body.rename(old, new)?)
                };
                PropExpr::forall(var, domain, body)
            }
        })
    }

    /// Capture-avoiding substitution of `replacement` for free occurrences of `x`.
    pub fn subst(&self, x: &VarName, replacement: &QueryExpr) -> PropExpr {
        let fv = replacement.free_vars();
        self.subst_with(x, replacement, &fv)
    }

    fn subst_with(&self, x: &VarName, rep: &QueryExpr, fv: &BTreeSet<VarName>) -> PropExpr {
        match self {
            PropExpr::Pred { name, args } => PropExpr::Pred {
                name: name.clone(),
                args: args.iter().map(|a| a.subst_with(x, rep, fv)).collect(),
            },
            PropExpr::Not(f) => PropExpr::Not(Box::new(f.subst_with(x, rep, fv))),
            PropExpr::And(f, g) => PropExpr::And(
                Box::new(f.subst_with(x, rep, fv)),
                Box::new(g.subst_with(x, rep, fv)),
            ),
            PropExpr::ForallIn { var, domain, body } => {
                let domain = domain.subst_with(x, rep, fv);
                if var == x || !body.free_vars().contains(x) {
                    return PropExpr::forall(var.clone(), domain, (**body).clone());
                }
                let (var, body) = freshen_prop(var, body, fv);
                PropExpr::forall(var, domain, body.subst_with(x, rep, fv))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> VarName {
        VarName::new(x)
    }

    fn set(xs: &[&str]) -> BTreeSet<VarName> {
        xs.iter().map(|x| v(x)).collect()
    }

    #[test]
    fn free_vars_of_variable() {
        assert_eq!(QueryExpr::var("x").free_vars(), set(&["x"]));
    }

    #[test]
    fn free_vars_comprehension_binds() {
        let q = QueryExpr::comprehension(
            "x",
            QueryExpr::concept("c"),
            PropExpr::pred("p", vec![QueryExpr::var("x")]),
        );
        assert!(q.free_vars().is_empty());
    }

    #[test]
    fn free_vars_big_union() {
        let q = QueryExpr::big_union(
            "x",
            QueryExpr::var("y"),
            QueryExpr::Tuple(vec![QueryExpr::var("x"), QueryExpr::var("z")]),
        );
        assert_eq!(q.free_vars(), set(&["y", "z"]));
    }

    #[test]
    fn rename_bound_variable() {
        let q = QueryExpr::comprehension(
            "x",
            QueryExpr::concept("c"),
            PropExpr::pred("p", vec![QueryExpr::var("x")]),
        );
        let expected = QueryExpr::comprehension(
            "y",
            QueryExpr::concept("c"),
            PropExpr::pred("p", vec![QueryExpr::var("y")]),
        );
        assert_eq!(q.alpha_rename(&v("x"), &v("y")).unwrap(), expected);
    }

    #[test]
    fn rename_to_itself_is_identity() {
        let q = QueryExpr::big_union("x", QueryExpr::var("x"), QueryExpr::var("w"));
        assert_eq!(q.alpha_rename(&v("x"), &v("x")).unwrap(), q);
    }

    #[test]
    fn rename_into_binder_captures() {
        // ⋃_{y∈Q} x  with x→y
        let q = QueryExpr::big_union("y", QueryExpr::concept("q"), QueryExpr::var("x"));
        assert!(q.alpha_rename(&v("x"), &v("y")).is_err());
    }

    #[test]
    fn rename_rejects_new_name_already_free() {
        let q = QueryExpr::Tuple(vec![QueryExpr::var("x"), QueryExpr::var("y")]);
        assert!(q.alpha_rename(&v("x"), &v("y")).is_err());
    }

    #[test]
    fn subst_avoids_capture() {
        // (⋃_{y∈c} (x, y))[x := y]  must not capture the replacement y
        let q = QueryExpr::big_union(
            "y",
            QueryExpr::concept("c"),
            QueryExpr::Tuple(vec![QueryExpr::var("x"), QueryExpr::var("y")]),
        );
        let r = q.subst(&v("x"), &QueryExpr::var("y"));
        assert_eq!(r.free_vars(), set(&["y"]));
        match r {
            QueryExpr::BigUnion { var, body, .. } => {
                assert_ne!(var, v("y"));
                assert_eq!(
                    *body,
                    QueryExpr::Tuple(vec![QueryExpr::var("y"), QueryExpr::Var(var)])
                );
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn subst_respects_shadowing() {
        let q = QueryExpr::big_union("x", QueryExpr::var("x"), QueryExpr::var("x"));
        let r = q.subst(&v("x"), &QueryExpr::concept("c"));
        assert_eq!(
            r,
            QueryExpr::big_union("x", QueryExpr::concept("c"), QueryExpr::var("x"))
        );
    }

    #[test]
    fn fresh_names() {
        assert_eq!(fresh_var("z", &set(&[])), v("z"));
        assert_eq!(fresh_var("z", &set(&["z", "z1"])), v("z2"));
    }
}
