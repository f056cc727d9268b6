//! Predefined symbols and the definable query forms.
//!
//! The predefined symbols are polymorphic families: `singleton : t → {t}`,
//! `union : ({t},{t}) → {t}`, `eq : (t,t) → prop` and `in : (t,{t}) → prop`,
//! instantiated at each use site by the checker. Their names are reserved.
//!
//! The definable forms are rewritten to kernel syntax with fresh variables;
//! see [`desugar`].

use std::collections::BTreeSet;

use crate::checker::TypeErrorKind;
use crate::kernel::{
    fresh_var, ConceptName, GeneralType, PropExpr, QueryExpr, RelExpr, Signature, Value, VarName,
};

pub const SINGLETON: &str = "singleton";
pub const UNION: &str = "union";
pub const EQ: &str = "eq";
pub const ELEM: &str = "in";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predefined {
    Singleton,
    Union,
    Eq,
    Elem,
}

impl Predefined {
    pub fn name(self) -> &'static str {
        match self {
            Predefined::Singleton => SINGLETON,
            Predefined::Union => UNION,
            Predefined::Eq => EQ,
            Predefined::Elem => ELEM,
        }
    }
}

pub fn is_reserved_name(name: &str) -> bool {
    matches!(name, SINGLETON | UNION | EQ | ELEM)
}

pub fn predefined_function(name: &str) -> Option<Predefined> {
    match name {
        SINGLETON => Some(Predefined::Singleton),
        UNION => Some(Predefined::Union),
        _ => None,
    }
}

pub fn predefined_predicate(name: &str) -> Option<Predefined> {
    match name {
        EQ => Some(Predefined::Eq),
        ELEM => Some(Predefined::Elem),
        _ => None,
    }
}

/// Makes the predefined families available in `sig`.
pub fn install_predefined(sig: &Signature) -> Signature {
    let mut s = sig.clone();
    s.set_predefined();
    s
}

type Mismatch = (TypeErrorKind, String);

fn arity(p: Predefined, expected: usize, got: usize) -> Result<(), Mismatch> {
    if expected == got {
        Ok(())
    } else {
        Err((
            TypeErrorKind::ArityMismatch,
            format!("{} takes {expected} arguments, got {got}", p.name()),
        ))
    }
}

fn mismatch(p: Predefined, tys: &[GeneralType]) -> Mismatch {
    let shown: Vec<String> = tys.iter().map(|t| t.to_string()).collect();
    (
        TypeErrorKind::TypeMismatch,
        format!("{} cannot be applied to ({})", p.name(), shown.join(", ")),
    )
}

/// Instantiates a predefined function at the given argument types.
pub fn predefined_function_type(p: Predefined, tys: &[GeneralType]) -> Result<GeneralType, Mismatch> {
    match p {
        Predefined::Singleton => {
            arity(p, 1, tys.len())?;
            match &tys[0] {
                GeneralType::Elem(t) => Ok(GeneralType::Set(t.clone())),
                GeneralType::Set(_) => Err(mismatch(p, tys)),
            }
        }
        Predefined::Union => {
            arity(p, 2, tys.len())?;
            match (&tys[0], &tys[1]) {
                (GeneralType::Set(a), GeneralType::Set(b)) if a == b => Ok(tys[0].clone()),
                _ => Err(mismatch(p, tys)),
            }
        }
        _ => unreachable!("{} is a predicate", p.name()),
    }
}

pub fn predefined_predicate_check(p: Predefined, tys: &[GeneralType]) -> Result<(), Mismatch> {
    arity(p, 2, tys.len())?;
    let ok = match (p, &tys[0], &tys[1]) {
        (Predefined::Eq, GeneralType::Elem(a), GeneralType::Elem(b)) => a == b,
        (Predefined::Elem, GeneralType::Elem(a), GeneralType::Set(b)) => a == b,
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(mismatch(p, tys))
    }
}

/// Fixed semantics of the predefined functions on well-typed arguments.
pub fn apply_predefined_function(p: Predefined, mut args: Vec<Value>) -> Value {
    match p {
        Predefined::Singleton => Value::set(args.pop()),
        Predefined::Union => {
            let b = args.pop().and_then(Value::into_set).unwrap_or_default();
            let mut a = args.pop().and_then(Value::into_set).unwrap_or_default();
            a.extend(b);
            Value::Set(a)
        }
        _ => unreachable!("{} is a predicate", p.name()),
    }
}

pub fn apply_predefined_predicate(p: Predefined, args: &[Value]) -> bool {
    match p {
        Predefined::Eq => args[0] == args[1],
        Predefined::Elem => args[1].as_set().is_some_and(|s| s.contains(&args[0])),
        _ => unreachable!("{} is a function", p.name()),
    }
}

// ---------------------------------------------------------------------------
// definable forms

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SugarForm {
    /// `{ body : var in domain }`
    Replacement {
        var: VarName,
        domain: QueryExpr,
        body: QueryExpr,
    },
    /// `{ body : x1 in Q1, …, xk in Qk }`; later domains may mention
    /// earlier variables.
    MultiReplacement {
        bindings: Vec<(VarName, QueryExpr)>,
        body: QueryExpr,
    },
    /// `select n1,…,nk from Q as x1,…,xN where F`. `vars` names the
    /// components of `from` as seen by `filter`.
    Select {
        indices: Vec<usize>,
        from: QueryExpr,
        vars: Vec<VarName>,
        filter: Option<PropExpr>,
    },
    /// `for x in Q let y = q where F return R`
    ForLetWhereReturn {
        var: VarName,
        domain: QueryExpr,
        let_var: VarName,
        let_value: QueryExpr,
        filter: Option<PropExpr>,
        ret: QueryExpr,
    },
    /// `box^c R . Q`: elements of `c` all of whose `R`-successors lie in `Q`.
    DlBox {
        concept: ConceptName,
        rel: RelExpr,
        target: QueryExpr,
    },
}

pub fn desugar(form: &SugarForm) -> QueryExpr {
    match form {
        SugarForm::Replacement { var, domain, body } => {
            desugar_replacement(var.clone(), domain.clone(), body.clone())
        }
        SugarForm::MultiReplacement { bindings, body } => {
            desugar_multi_replacement(bindings.clone(), body.clone())
        }
        SugarForm::Select {
            indices,
            from,
            vars,
            filter,
        } => desugar_select(indices, from.clone(), vars, filter.clone()),
        SugarForm::ForLetWhereReturn {
            var,
            domain,
            let_var,
            let_value,
            filter,
            ret,
        } => desugar_for_let(
            var.clone(),
            domain.clone(),
            let_var.clone(),
            let_value.clone(),
            filter.clone(),
            ret.clone(),
        ),
        SugarForm::DlBox {
            concept,
            rel,
            target,
        } => desugar_dl_box(concept.clone(), rel.clone(), target.clone()),
    }
}

fn singleton(q: QueryExpr) -> QueryExpr {
    QueryExpr::apply(SINGLETON, vec![q])
}

/// `{q : x ∈ Q}` becomes `⋃_{x∈Q} {q}`.
pub fn desugar_replacement(x: VarName, domain: QueryExpr, body: QueryExpr) -> QueryExpr {
    QueryExpr::big_union(x, domain, singleton(body))
}

/// Nests unary replacements, innermost binding last.
pub fn desugar_multi_replacement(bindings: Vec<(VarName, QueryExpr)>, body: QueryExpr) -> QueryExpr {
    let mut bindings = bindings.into_iter().rev();
    let (x, q) = bindings.next().expect("at least one binding");
    let mut out = desugar_replacement(x, q, body);
    for (x, q) in bindings {
        out = QueryExpr::big_union(x, q, out);
    }
    out
}

fn taken(qs: &[&QueryExpr], fs: &[&PropExpr]) -> BTreeSet<VarName> {
    let mut t = BTreeSet::new();
    for q in qs {
        t.extend(q.free_vars());
    }
    for f in fs {
        t.extend(f.free_vars());
    }
    t
}

/// `{⟨z.n1,…,z.nk⟩ : z ∈ {y ∈ Q | F[xi := y.i]}}`. A missing filter is
/// `y = y`.
pub fn desugar_select(
    indices: &[usize],
    from: QueryExpr,
    vars: &[VarName],
    filter: Option<PropExpr>,
) -> QueryExpr {
    let mut avoid = taken(&[&from], &filter.iter().collect::<Vec<_>>());
    avoid.extend(vars.iter().cloned());
    let y = fresh_var("y", &avoid);
    avoid.insert(y.clone());
    let z = fresh_var("z", &avoid);
    let filter = match filter {
        Some(f) => vars.iter().enumerate().fold(f, |f, (i, x)| {
            f.subst(x, &QueryExpr::Var(y.clone()).proj(i + 1))
        }),
        None => PropExpr::pred(EQ, vec![QueryExpr::Var(y.clone()), QueryExpr::Var(y.clone())]),
    };
    let inner = QueryExpr::comprehension(y, from, filter);
    let picked = indices
        .iter()
        .map(|&n| QueryExpr::Var(z.clone()).proj(n))
        .collect();
    desugar_replacement(z, inner, QueryExpr::Tuple(picked))
}

/// `⋃_{z∈P} R[x:=z.1, y:=z.2]` with
/// `P = {z ∈ {⟨x,q⟩ : x∈Q} | F[x:=z.1, y:=z.2]}`.
pub fn desugar_for_let(
    x: VarName,
    domain: QueryExpr,
    y: VarName,
    let_value: QueryExpr,
    filter: Option<PropExpr>,
    ret: QueryExpr,
) -> QueryExpr {
    let mut avoid = taken(&[&domain, &let_value, &ret], &filter.iter().collect::<Vec<_>>());
    avoid.insert(x.clone());
    avoid.insert(y.clone());
    let z = fresh_var("z", &avoid);
    let z1 = QueryExpr::Var(z.clone()).proj(1);
    let z2 = QueryExpr::Var(z.clone()).proj(2);
    let pairs = desugar_replacement(
        x.clone(),
        domain,
        QueryExpr::Tuple(vec![QueryExpr::Var(x.clone()), let_value]),
    );
    let filter = match filter {
        Some(f) => f.subst(&x, &z1).subst(&y, &z2),
        None => PropExpr::pred(EQ, vec![QueryExpr::Var(z.clone()), QueryExpr::Var(z.clone())]),
    };
    let p = QueryExpr::comprehension(z.clone(), pairs, filter);
    QueryExpr::big_union(z, p, ret.subst(&x, &z1).subst(&y, &z2))
}

/// `{x ∈ c | ∀y ∈ R.x . y ∈ Q}`
pub fn desugar_dl_box(concept: ConceptName, rel: RelExpr, target: QueryExpr) -> QueryExpr {
    let mut avoid = target.free_vars();
    let x = fresh_var("x", &avoid);
    avoid.insert(x.clone());
    let y = fresh_var("y", &avoid);
    QueryExpr::comprehension(
        x.clone(),
        QueryExpr::Concept(concept),
        PropExpr::forall(
            y.clone(),
            QueryExpr::image(rel, QueryExpr::Var(x)),
            PropExpr::pred(ELEM, vec![QueryExpr::Var(y), target]),
        ),
    )
}
