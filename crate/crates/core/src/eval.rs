//! The interpretation function over a model, with strict propagation of
//! undefinedness from partial function symbols.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::checker::{self, Resolutions, Resolved, TypeError};
use crate::index::{ImageMemo, Index};
use crate::kernel::{
    BaseTypeName, Context, FunName, GeneralType, Literal, LiteralValue, PredName, PropExpr,
    QueryExpr, Signature, SimpleType, Value, VarName,
};
use crate::sugar;

/// Interpretations of the function and predicate symbols of a signature.
///
/// `overload` is the position of the chosen profile among the symbol's
/// declarations. An `Err` is the error value, carrying a human-readable
/// reason.
pub trait HostFunctions: Send + Sync {
    fn call_function(
        &self,
        name: &FunName,
        index: Option<u32>,
        overload: usize,
        args: &[Value],
    ) -> Result<Value, String>;

    fn call_predicate(&self, name: &PredName, overload: usize, args: &[Value]) -> Result<bool, String>;

    /// Whether `v` belongs to the universe of base type `a`.
    fn is_member(&self, a: &BaseTypeName, v: &Value) -> bool;

    /// Interprets a literal as itself if it lies in the universe.
    fn literal(&self, lit: &Literal) -> Result<Value, String> {
        let v = match &lit.value {
            LiteralValue::Str(s) => Value::Uri(s.clone()),
            LiteralValue::Obj(o) => Value::Obj(o.clone()),
        };
        if self.is_member(&lit.base, &v) {
            Ok(v)
        } else {
            Err(format!("{v} is not in the universe of {}", lit.base))
        }
    }
}

pub struct Model {
    pub signature: Signature,
    pub index: Arc<Index>,
    pub host: Arc<dyn HostFunctions>,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("signature", &self.signature)
            .field("index", &self.index)
            .finish_non_exhaustive()
    }
}

/// Values for the variables of a context.
#[derive(Clone, Debug, Default)]
pub struct Assignment {
    ctx: Context,
    values: HashMap<VarName, Value>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn bind(mut self, x: impl Into<VarName>, t: SimpleType, v: Value) -> Self {
        let x = x.into();
        self.ctx = self.ctx.extend(x.clone(), t);
        self.values.insert(x, v);
        self
    }

    pub fn context(&self) -> &Context {
        &self.ctx
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Count undefined comprehension filters and quantifier bodies as false
    /// instead of propagating the error.
    pub lenient_filter: bool,
}

/// The innermost failing application and where it sits in the query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Undefined {
    pub symbol: String,
    pub args: Vec<Value>,
    pub reason: String,
    pub path: Vec<String>,
}

impl fmt::Display for Undefined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.symbol)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ") is undefined: {}", self.reason)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    Ok(Value),
    Undefined(Undefined),
}

impl EvalOutcome {
    pub fn ok(self) -> Option<Value> {
        match self {
            EvalOutcome::Ok(v) => Some(v),
            EvalOutcome::Undefined(_) => None,
        }
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, EvalOutcome::Undefined(_))
    }
}

/// Typechecks `q` under the assignment's context and evaluates it.
pub fn eval_query(
    model: &Model,
    alpha: &Assignment,
    q: &QueryExpr,
    options: EvalOptions,
) -> Result<(GeneralType, EvalOutcome), TypeError> {
    let (ty, res) = checker::resolve_query(&model.signature, alpha.context(), q)?;
    let mut ev = Evaluator::new(model, &res, options, alpha);
    let out = match ev.query(q) {
        Ok(v) => EvalOutcome::Ok(v),
        Err(u) => EvalOutcome::Undefined(*u),
    };
    Ok((ty, out))
}

/// Checks and evaluates a proposition; the inner `Err` is the error value.
pub fn eval_prop(
    model: &Model,
    alpha: &Assignment,
    f: &PropExpr,
    options: EvalOptions,
) -> Result<Result<bool, Undefined>, TypeError> {
    let res = checker::resolve_prop(&model.signature, alpha.context(), f)?;
    let mut ev = Evaluator::new(model, &res, options, alpha);
    Ok(ev.prop(f).map_err(|u| *u))
}

type Eval<T> = Result<T, Box<Undefined>>;

trait Within {
    fn within(self, step: impl FnOnce() -> String) -> Self;
}

impl<T> Within for Eval<T> {
    fn within(self, step: impl FnOnce() -> String) -> Self {
        self.map_err(|mut u| {
            u.path.insert(0, step());
            u
        })
    }
}

struct Evaluator<'a> {
    model: &'a Model,
    res: &'a Resolutions,
    options: EvalOptions,
    env: Vec<(VarName, Value)>,
    memo: ImageMemo,
}

impl<'a> Evaluator<'a> {
    fn new(model: &'a Model, res: &'a Resolutions, options: EvalOptions, alpha: &Assignment) -> Self {
        let env = alpha
            .ctx
            .iter()
            .filter_map(|(x, _)| alpha.values.get(x).map(|v| (x.clone(), v.clone())))
            .collect();
        Evaluator {
            model,
            res,
            options,
            env,
            memo: ImageMemo::default(),
        }
    }

    fn lookup(&self, x: &VarName) -> Value {
        self.env
            .iter()
            .rev()
            .find(|(y, _)| y == x)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| panic!("variable {x} has no value; query was not checked"))
    }

    fn set(&mut self, q: &QueryExpr) -> Eval<BTreeSet<Value>> {
        Ok(self
            .query(q)?
            .into_set()
            .expect("checked query of set type yields a set"))
    }

    fn query(&mut self, q: &QueryExpr) -> Eval<Value> {
        match q {
            QueryExpr::Concept(c) => Ok(Value::Set(self.model.index.concept(c).clone())),
            QueryExpr::Var(x) => Ok(self.lookup(x)),
            QueryExpr::Literal(lit) => self.model.host.literal(lit).map_err(|reason| {
                Box::new(Undefined {
                    symbol: format!("literal:{}", lit.base),
                    args: Vec::new(),
                    reason,
                    path: Vec::new(),
                })
            }),
            QueryExpr::Apply { fun, index, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    vals.push(self.query(a).within(|| format!("apply({fun})/arg{}", i + 1))?);
                }
                match self.res.function(q).expect("application was resolved") {
                    Resolved::Predefined(p) => Ok(sugar::apply_predefined_function(p, vals)),
                    Resolved::Declared(k) => {
                        match self.model.host.call_function(fun, *index, k, &vals) {
                            Ok(v) => Ok(v),
                            Err(reason) => Err(Box::new(Undefined {
                                symbol: match index {
                                    Some(i) => format!("{fun}[{i}]"),
                                    None => fun.to_string(),
                                },
                                args: vals,
                                reason,
                                path: vec![format!("apply({fun})")],
                            })),
                        }
                    }
                }
            }
            QueryExpr::Tuple(items) => {
                let mut vals = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    vals.push(self.query(item).within(|| format!("tuple/item{}", i + 1))?);
                }
                Ok(Value::tuple(vals))
            }
            QueryExpr::Proj(inner, i) => {
                let v = self.query(inner).within(|| format!("proj{i}"))?;
                Ok(match v {
                    Value::Tuple(mut vs) => vs.swap_remove(i - 1),
                    other => other,
                })
            }
            QueryExpr::Image(r, arg) => {
                let u = self.query(arg).within(|| "image/argument".into())?;
                Ok(Value::Set(self.model.index.image_memo(r, &u, &mut self.memo)))
            }
            QueryExpr::BigUnion { var, domain, body } => {
                let dom = self.set(domain).within(|| "bigunion/domain".into())?;
                let mut out = BTreeSet::new();
                for u in dom {
                    self.env.push((var.clone(), u));
                    let r = self.set(body);
                    let (_, u) = self.env.pop().unwrap();
                    out.extend(r.within(|| format!("bigunion/body[{var}={u}]"))?);
                }
                Ok(Value::Set(out))
            }
            QueryExpr::Comprehension {
                var,
                domain,
                filter,
            } => {
                let dom = self.set(domain).within(|| "comprehension/domain".into())?;
                let mut out = BTreeSet::new();
                for u in dom {
                    self.env.push((var.clone(), u));
                    let r = self.filter(filter);
                    let (_, u) = self.env.pop().unwrap();
                    if r.within(|| format!("comprehension/filter[{var}={u}]"))? {
                        out.insert(u);
                    }
                }
                Ok(Value::Set(out))
            }
        }
    }

    /// A proposition in filter position: lenient mode turns undefined into false.
    fn filter(&mut self, f: &PropExpr) -> Eval<bool> {
        match self.prop(f) {
            Err(_) if self.options.lenient_filter => Ok(false),
            r => r,
        }
    }

    fn prop(&mut self, f: &PropExpr) -> Eval<bool> {
        match f {
            PropExpr::Pred { name, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for (i, a) in args.iter().enumerate() {
                    vals.push(self.query(a).within(|| format!("pred({name})/arg{}", i + 1))?);
                }
                match self.res.predicate(f).expect("predicate was resolved") {
                    Resolved::Predefined(p) => Ok(sugar::apply_predefined_predicate(p, &vals)),
                    Resolved::Declared(k) => match self.model.host.call_predicate(name, k, &vals) {
                        Ok(b) => Ok(b),
                        Err(reason) => Err(Box::new(Undefined {
                            symbol: name.to_string(),
                            args: vals,
                            reason,
                            path: vec![format!("pred({name})")],
                        })),
                    },
                }
            }
            PropExpr::Not(inner) => Ok(!self.prop(inner).within(|| "not".into())?),
            PropExpr::And(l, r) => {
                let a = self.prop(l).within(|| "and.left".into());
                let b = self.prop(r).within(|| "and.right".into());
                Ok(a? & b?)
            }
            PropExpr::ForallIn { var, domain, body } => {
                let dom = self.set(domain).within(|| "forall/domain".into())?;
                let mut all = true;
                for u in dom {
                    self.env.push((var.clone(), u));
                    let r = self.filter(body);
                    let (_, u) = self.env.pop().unwrap();
                    all &= r.within(|| format!("forall/body[{var}={u}]"))?;
                }
                Ok(all)
            }
        }
    }
}

type HostFn = Box<dyn Fn(Option<u32>, &[Value]) -> Result<Value, String> + Send + Sync>;
type HostPred = Box<dyn Fn(&[Value]) -> Result<bool, String> + Send + Sync>;
type Membership = Box<dyn Fn(&Value) -> bool + Send + Sync>;

/// Host functions given by closures, keyed by symbol name and overload
/// position. Missing entries are undefined everywhere; base types without
/// a membership test accept every value.
#[derive(Default)]
pub struct TableHost {
    functions: HashMap<(String, usize), HostFn>,
    predicates: HashMap<(String, usize), HostPred>,
    members: HashMap<BaseTypeName, Membership>,
}

impl TableHost {
    pub fn new() -> Self {
        TableHost::default()
    }

    pub fn function(
        mut self,
        name: &str,
        overload: usize,
        f: impl Fn(Option<u32>, &[Value]) -> Result<Value, String> + Send + Sync + 'static,
    ) -> Self {
        self.functions.insert((name.to_owned(), overload), Box::new(f));
        self
    }

    pub fn predicate(
        mut self,
        name: &str,
        overload: usize,
        p: impl Fn(&[Value]) -> Result<bool, String> + Send + Sync + 'static,
    ) -> Self {
        self.predicates.insert((name.to_owned(), overload), Box::new(p));
        self
    }

    pub fn membership(
        mut self,
        a: impl Into<BaseTypeName>,
        m: impl Fn(&Value) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.members.insert(a.into(), Box::new(m));
        self
    }
}

impl HostFunctions for TableHost {
    fn call_function(
        &self,
        name: &FunName,
        index: Option<u32>,
        overload: usize,
        args: &[Value],
    ) -> Result<Value, String> {
        match self.functions.get(&(name.to_string(), overload)) {
            Some(f) => f(index, args),
            None => Err(format!("no interpretation for {name}")),
        }
    }

    fn call_predicate(&self, name: &PredName, overload: usize, args: &[Value]) -> Result<bool, String> {
        match self.predicates.get(&(name.to_string(), overload)) {
            Some(p) => p(args),
            None => Err(format!("no interpretation for {name}")),
        }
    }

    fn is_member(&self, a: &BaseTypeName, v: &Value) -> bool {
        self.members.get(a).is_none_or(|m| m(v))
    }
}
