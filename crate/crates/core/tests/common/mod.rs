//! Shared generators: a small two-sorted signature with random finite
//! models, a type-directed generator of closed well-typed queries, a naive
//! relation oracle, and random objects and libraries.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use qmt::checker::check_signature;
use qmt::eval::{Model, TableHost};
use qmt::index::{build_index, Fact};
use qmt::kernel::{
    GeneralType, Literal, LiteralValue, PropExpr, QueryExpr, RelExpr, Signature, SignatureDecl,
    SimpleType, Value,
};
use qmt::mmtlib::{Constant, Library, Theory};
use qmt::object::{Object, VarDecl};
use qmt::sugar::install_predefined;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SIGNATURE: &str = "
type a
type b
concept ca : a
concept cc : a
concept cb : b
relation r : a -> a
relation s : a -> a
relation p : a -> b
relation q : b -> a
relation t : b -> b
function f : a -> b
function g : a, b -> a
function pick : {a} -> a
function nb : b -> {a}
predicate pa : a
predicate pab : a, b
";

pub const BASES: [&str; 2] = ["a", "b"];

/// Relations with their endpoint sorts.
pub const RELATIONS: [(&str, &str, &str); 5] = [
    ("r", "a", "a"),
    ("s", "a", "a"),
    ("p", "a", "b"),
    ("q", "b", "a"),
    ("t", "b", "b"),
];

pub const CONCEPTS: [(&str, &str); 3] = [("ca", "a"), ("cc", "a"), ("cb", "b")];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn signature() -> Signature {
    let decls = qmt::frontend::parse_signature(SIGNATURE).expect("fixture signature parses");
    install_predefined(&check_signature(&decls).expect("fixture signature checks"))
}

pub fn elem(base: &str, i: usize) -> Value {
    Value::uri(format!("{base}{i}"))
}

/// A finite model of [`SIGNATURE`] with the raw tables kept for oracles.
pub struct RandomModel {
    pub sizes: BTreeMap<&'static str, usize>,
    pub concepts: BTreeMap<&'static str, BTreeSet<Value>>,
    pub relations: BTreeMap<&'static str, BTreeSet<(Value, Value)>>,
    pub model: Model,
}

impl RandomModel {
    pub fn universe(&self, base: &str) -> Vec<Value> {
        (0..self.sizes[base]).map(|i| elem(base, i)).collect()
    }

    /// Builds a random model with between 3 and 6 elements per sort and at
    /// most `max_edges` relation edges in total.
    pub fn generate(rng: &mut impl Rng, max_edges: usize) -> RandomModel {
        let sizes: BTreeMap<&'static str, usize> =
            BASES.iter().map(|&b| (b, rng.gen_range(3..=6))).collect();
        let mut concepts = BTreeMap::new();
        for (c, base) in CONCEPTS {
            let set: BTreeSet<Value> = (0..sizes[base])
                .filter(|_| rng.gen_bool(0.5))
                .map(|i| elem(base, i))
                .collect();
            concepts.insert(c, set);
        }
        let mut relations: BTreeMap<&'static str, BTreeSet<(Value, Value)>> =
            RELATIONS.iter().map(|(r, _, _)| (*r, BTreeSet::new())).collect();
        let edges = rng.gen_range(0..=max_edges);
        for _ in 0..edges {
            let (r, from, to) = *RELATIONS.choose(rng).unwrap();
            let u = elem(from, rng.gen_range(0..sizes[from]));
            let v = elem(to, rng.gen_range(0..sizes[to]));
            relations.get_mut(r).unwrap().insert((u, v));
        }
        RandomModel::build(sizes, concepts, relations, rng)
    }

    pub fn build(
        sizes: BTreeMap<&'static str, usize>,
        concepts: BTreeMap<&'static str, BTreeSet<Value>>,
        relations: BTreeMap<&'static str, BTreeSet<(Value, Value)>>,
        rng: &mut impl Rng,
    ) -> RandomModel {
        let (na, nb) = (sizes["a"], sizes["b"]);
        // f is partial: roughly one in five arguments is undefined
        let mut f_table = BTreeMap::new();
        for i in 0..na {
            let j = rng.gen_range(0..nb);
            if rng.gen_bool(0.8) {
                f_table.insert(elem("a", i), elem("b", j));
            }
        }
        let g_table: BTreeMap<(Value, Value), Value> = (0..na)
            .flat_map(|i| (0..nb).map(move |j| (i, j)))
            .collect::<Vec<_>>()
            .into_iter()
            .map(|(i, j)| ((elem("a", i), elem("b", j)), elem("a", rng.gen_range(0..na))))
            .collect();
        let nb_table: BTreeMap<Value, BTreeSet<Value>> = (0..nb)
            .map(|j| {
                let s = (0..na).filter(|_| rng.gen_bool(0.4)).map(|i| elem("a", i)).collect();
                (elem("b", j), s)
            })
            .collect();
        let pa: BTreeSet<Value> = (0..na).filter(|_| rng.gen_bool(0.5)).map(|i| elem("a", i)).collect();
        let pab: BTreeSet<(Value, Value)> = (0..na)
            .flat_map(|i| (0..nb).map(move |j| (i, j)))
            .filter(|_| rng.gen_bool(0.4))
            .map(|(i, j)| (elem("a", i), elem("b", j)))
            .collect();

        let member = move |base: &'static str, n: usize| {
            move |v: &Value| {
                v.as_uri()
                    .and_then(|u| u.strip_prefix(base))
                    .and_then(|k| k.parse::<usize>().ok())
                    .is_some_and(|k| k < n)
            }
        };
        let host = TableHost::new()
            .membership("a", member("a", na))
            .membership("b", member("b", nb))
            .function("f", 0, move |_, args| {
                f_table.get(&args[0]).cloned().ok_or_else(|| format!("f undefined at {}", args[0]))
            })
            .function("g", 0, move |_, args| Ok(g_table[&(args[0].clone(), args[1].clone())].clone()))
            .function("pick", 0, |_, args| {
                let s = args[0].as_set().unwrap();
                s.iter().next().cloned().ok_or_else(|| "pick of the empty set".into())
            })
            .function("nb", 0, move |_, args| Ok(Value::Set(nb_table[&args[0]].clone())))
            .predicate("pa", 0, move |args| Ok(pa.contains(&args[0])))
            .predicate("pab", 0, move |args| Ok(pab.contains(&(args[0].clone(), args[1].clone()))));

        let sig = signature();
        let mut facts = Vec::new();
        for (c, set) in &concepts {
            facts.extend(set.iter().map(|v| Fact::Concept((*c).into(), v.clone())));
        }
        for (r, pairs) in &relations {
            facts.extend(pairs.iter().map(|(u, v)| Fact::Relation((*r).into(), u.clone(), v.clone())));
        }
        let index = build_index(&sig, facts, &|a, v| {
            use qmt::eval::HostFunctions;
            host.is_member(a, v)
        })
        .expect("facts respect the signature");
        RandomModel {
            sizes,
            concepts,
            relations,
            model: Model {
                signature: sig,
                index: Arc::new(index),
                host: Arc::new(host),
            },
        }
    }

    /// The relation denoted by `r`, computed from the raw edge tables.
    pub fn materialize(&self, r: &RelExpr) -> BTreeSet<(Value, Value)> {
        match r {
            RelExpr::Atomic(n) => self.relations[n.as_str()].clone(),
            RelExpr::Inverse(a) => self.materialize(a).into_iter().map(|(u, v)| (v, u)).collect(),
            RelExpr::TransClosure(a) => {
                let base = self.materialize(a);
                let mut closure = base.clone();
                loop {
                    let step: BTreeSet<_> = closure
                        .iter()
                        .flat_map(|(u, v)| {
                            base.iter()
                                .filter(move |(v2, _)| v2 == v)
                                .map(move |(_, w)| (u.clone(), w.clone()))
                        })
                        .collect();
                    let before = closure.len();
                    closure.extend(step);
                    if closure.len() == before {
                        return closure;
                    }
                }
            }
            RelExpr::Compose(a, b) => {
                let (a, b) = (self.materialize(a), self.materialize(b));
                a.iter()
                    .flat_map(|(u, v)| b.iter().filter(move |(v2, _)| v2 == v).map(move |(_, w)| (u.clone(), w.clone())))
                    .collect()
            }
            RelExpr::Union(a, b) => self.materialize(a).union(&self.materialize(b)).cloned().collect(),
            RelExpr::Intersect(a, b) => self.materialize(a).intersection(&self.materialize(b)).cloned().collect(),
            RelExpr::Diff(a, b) => self.materialize(a).difference(&self.materialize(b)).cloned().collect(),
        }
    }
}

/// A uniformly chosen relation expression from sort `from` to sort `to` of
/// depth at most `depth`.
pub fn gen_relation(rng: &mut impl Rng, from: &'static str, to: &'static str, depth: usize) -> RelExpr {
    let atoms: Vec<&str> = RELATIONS
        .iter()
        .filter(|(_, a, b)| *a == from && *b == to)
        .map(|(r, _, _)| *r)
        .collect();
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..7) };
    match choice {
        0 if !atoms.is_empty() => RelExpr::atom(*atoms.choose(rng).unwrap()),
        0 | 1 => gen_relation(rng, to, from, depth.saturating_sub(1)).inv(),
        2 if from == to => gen_relation(rng, from, to, depth - 1).plus(),
        2 | 3 => {
            let mid = *BASES.choose(rng).unwrap();
            gen_relation(rng, from, mid, depth - 1).then(gen_relation(rng, mid, to, depth - 1))
        }
        4 => gen_relation(rng, from, to, depth - 1).union(gen_relation(rng, from, to, depth - 1)),
        5 => gen_relation(rng, from, to, depth - 1).intersect(gen_relation(rng, from, to, depth - 1)),
        _ => gen_relation(rng, from, to, depth - 1).minus(gen_relation(rng, from, to, depth - 1)),
    }
}

/// Type-directed generator of well-typed queries over [`SIGNATURE`].
pub struct QueryGen<'r, R: Rng> {
    pub rng: &'r mut R,
    fresh: usize,
    /// Also emit object literals and indexed applications; such queries
    /// parse and print but are not well-typed over [`SIGNATURE`].
    pub syntax_only: bool,
}

type Ctx = Vec<(String, Vec<&'static str>)>;

impl<'r, R: Rng> QueryGen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        QueryGen {
            rng,
            fresh: 0,
            syntax_only: false,
        }
    }

    fn var(&mut self) -> String {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn simple(&mut self) -> Vec<&'static str> {
        let n = if self.rng.gen_bool(0.7) { 1 } else { self.rng.gen_range(2..=3) };
        (0..n).map(|_| *BASES.choose(self.rng).unwrap()).collect()
    }

    /// A closed query of a random general type.
    pub fn closed(&mut self, depth: usize) -> (QueryExpr, GeneralType) {
        let ty = self.simple();
        let gt = SimpleType::new(ty.iter().map(|&b| b.into()).collect());
        if self.rng.gen_bool(0.75) {
            (self.set(&Vec::new(), &ty, depth), GeneralType::Set(gt))
        } else {
            (self.elem(&Vec::new(), &ty, depth), GeneralType::Elem(gt))
        }
    }

    pub fn set(&mut self, ctx: &Ctx, ty: &[&'static str], depth: usize) -> QueryExpr {
        let leaf = depth == 0;
        loop {
            let pick = if leaf { self.rng.gen_range(0..2) } else { self.rng.gen_range(0..9) };
            match pick {
                0 if ty.len() == 1 => {
                    let cs: Vec<&str> = CONCEPTS.iter().filter(|(_, b)| *b == ty[0]).map(|(c, _)| *c).collect();
                    return QueryExpr::concept(*cs.choose(self.rng).unwrap());
                }
                0 | 1 => {
                    return QueryExpr::apply("singleton", vec![self.elem(ctx, ty, depth.saturating_sub(1))]);
                }
                2 if ty.len() == 1 => {
                    let from = *BASES.choose(self.rng).unwrap();
                    let rd = self.rng.gen_range(0..=2);
                    let r = gen_relation(self.rng, from, ty[0], rd);
                    let arg = self.elem(ctx, &[from], depth - 1);
                    return QueryExpr::image(r, arg);
                }
                3 if ty == ["a"] => return QueryExpr::apply("nb", vec![self.elem(ctx, &["b"], depth - 1)]),
                4 => {
                    let (l, r) = (self.set(ctx, ty, depth - 1), self.set(ctx, ty, depth - 1));
                    return QueryExpr::apply("union", vec![l, r]);
                }
                5 | 6 => {
                    let dt = self.simple();
                    let domain = self.set(ctx, &dt, depth - 1);
                    let x = self.var();
                    let mut inner = ctx.clone();
                    inner.push((x.clone(), dt));
                    let body = self.set(&inner, ty, depth - 1);
                    return QueryExpr::big_union(x, domain, body);
                }
                7 | 8 => {
                    let domain = self.set(ctx, ty, depth - 1);
                    let x = self.var();
                    let mut inner = ctx.clone();
                    inner.push((x.clone(), ty.to_vec()));
                    let filter = self.prop(&inner, depth - 1);
                    return QueryExpr::comprehension(x, domain, filter);
                }
                _ => {}
            }
        }
    }

    pub fn elem(&mut self, ctx: &Ctx, ty: &[&'static str], depth: usize) -> QueryExpr {
        let vars: Vec<&String> = ctx.iter().filter(|(_, t)| t == ty).map(|(x, _)| x).collect();
        if ty.len() > 1 {
            if !vars.is_empty() && self.rng.gen_bool(0.5) {
                return QueryExpr::var(vars.choose(self.rng).unwrap().as_str());
            }
            return QueryExpr::Tuple(ty.iter().map(|&b| self.elem(ctx, &[b], depth.saturating_sub(1))).collect());
        }
        let base = ty[0];
        let leaf = depth == 0;
        loop {
            match self.rng.gen_range(0..if leaf { 3 } else { 8 }) {
                0 | 1 if !vars.is_empty() => return QueryExpr::var(vars.choose(self.rng).unwrap().as_str()),
                0..=2 => {
                    if self.syntax_only && self.rng.gen_bool(0.3) {
                        return QueryExpr::obj(base, gen_object(self.rng, 2, &[]));
                    }
                    return QueryExpr::uri(base, format!("{base}{}", self.rng.gen_range(0..4)));
                }
                3 if base == "b" => return QueryExpr::apply("f", vec![self.elem(ctx, &["a"], depth - 1)]),
                3 => {
                    let (x, y) = (self.elem(ctx, &["a"], depth - 1), self.elem(ctx, &["b"], depth - 1));
                    return QueryExpr::apply("g", vec![x, y]);
                }
                4 if base == "a" => return QueryExpr::apply("pick", vec![self.set(ctx, &["a"], depth - 1)]),
                4 if self.syntax_only => {
                    let i = self.rng.gen_range(1..4);
                    return QueryExpr::apply_indexed("h", i, vec![self.elem(ctx, &["a"], depth - 1)]);
                }
                5 | 6 => {
                    let mut tt = self.simple();
                    if tt.len() == 1 {
                        tt.push(*BASES.choose(self.rng).unwrap());
                    }
                    let i = self.rng.gen_range(0..tt.len());
                    tt[i] = base;
                    let inner = self.elem(ctx, &tt, depth - 1);
                    return inner.proj(i + 1);
                }
                _ => {}
            }
        }
    }

    pub fn prop(&mut self, ctx: &Ctx, depth: usize) -> PropExpr {
        let leaf = depth == 0;
        match self.rng.gen_range(0..if leaf { 4 } else { 7 }) {
            0 => PropExpr::pred("pa", vec![self.elem(ctx, &["a"], depth.saturating_sub(1))]),
            1 => {
                let (x, y) = (self.elem(ctx, &["a"], depth.saturating_sub(1)), self.elem(ctx, &["b"], depth.saturating_sub(1)));
                PropExpr::pred("pab", vec![x, y])
            }
            2 => {
                let ty = self.simple();
                let (x, y) = (self.elem(ctx, &ty, depth.saturating_sub(1)), self.elem(ctx, &ty, depth.saturating_sub(1)));
                PropExpr::pred("eq", vec![x, y])
            }
            3 => {
                let ty = self.simple();
                let (x, y) = (self.elem(ctx, &ty, depth.saturating_sub(1)), self.set(ctx, &ty, depth.saturating_sub(1)));
                PropExpr::pred("in", vec![x, y])
            }
            4 => self.prop(ctx, depth - 1).not(),
            5 => self.prop(ctx, depth - 1).and(self.prop(ctx, depth - 1)),
            _ => {
                let ty = self.simple();
                let domain = self.set(ctx, &ty, depth - 1);
                let x = self.var();
                let mut inner = ctx.clone();
                inner.push((x.clone(), ty));
                let body = self.prop(&inner, depth - 1);
                PropExpr::forall(x, domain, body)
            }
        }
    }
}

/// Whether `v` is a value of type `ty` in a model with the given sizes.
pub fn has_type(v: &Value, ty: &GeneralType, sizes: &BTreeMap<&'static str, usize>) -> bool {
    let elem_ok = |e: &Value, st: &SimpleType| -> bool {
        let comps = st.components();
        let parts: Vec<&Value> = if comps.len() == 1 {
            vec![e]
        } else {
            match e {
                Value::Tuple(vs) if vs.len() == comps.len() => vs.iter().collect(),
                _ => return false,
            }
        };
        parts.iter().zip(comps).all(|(p, b)| {
            p.as_uri()
                .and_then(|u| u.strip_prefix(b.as_str()))
                .and_then(|k| k.parse::<usize>().ok())
                .is_some_and(|k| k < sizes[b.as_str()])
        })
    };
    match (ty, v) {
        (GeneralType::Elem(st), e) if e.is_element() => elem_ok(e, st),
        (GeneralType::Set(st), Value::Set(s)) => s.iter().all(|e| elem_ok(e, st)),
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// objects and libraries

pub const SYMBOLS: [&str; 5] = ["urn:o?T?s0", "urn:o?T?s1", "urn:o?T?s2", "urn:o?T?s3", "urn:o?T?bind"];
pub const VARS: [&str; 3] = ["x", "y", "z"];

/// A random object of depth at most `depth`; variables are drawn from
/// [`VARS`] and `extra`.
pub fn gen_object(rng: &mut impl Rng, depth: usize, extra: &[&str]) -> Object {
    let pick = if depth == 0 { rng.gen_range(0..4) } else { rng.gen_range(0..7) };
    match pick {
        0 | 1 => Object::sym(SYMBOLS[rng.gen_range(0..4)]),
        2 => {
            let pool: Vec<&str> = VARS.iter().chain(extra).copied().collect();
            Object::var(*pool.choose(rng).unwrap())
        }
        3 => {
            if rng.gen_bool(0.5) {
                Object::lit("integer", rng.gen_range(-3..10).to_string())
            } else {
                Object::lit("string", ["", "a b", "<&>", "ü"][rng.gen_range(0..4)])
            }
        }
        4 | 5 => {
            let head = if rng.gen_bool(0.85) {
                Object::sym(SYMBOLS[rng.gen_range(0..4)])
            } else {
                gen_object(rng, depth - 1, extra)
            };
            let n = rng.gen_range(1..=3);
            Object::app(head, (0..n).map(|_| gen_object(rng, depth - 1, extra)).collect())
        }
        _ => {
            let n = rng.gen_range(1..=2);
            let ctx = (0..n)
                .map(|_| {
                    let ty = rng.gen_bool(0.5).then(|| gen_object(rng, depth - 1, extra));
                    VarDecl::new(*VARS.choose(rng).unwrap(), ty)
                })
                .collect();
            Object::bind(Object::sym(SYMBOLS[4]), ctx, gen_object(rng, depth - 1, extra))
        }
    }
}

/// Number of subobjects, counting context type attributions.
pub fn count_subterms(o: &Object) -> usize {
    match o {
        Object::Oms(_) | Object::Omv(_) | Object::Omlit { .. } => 1,
        Object::Oma(h, args) => 1 + count_subterms(h) + args.iter().map(count_subterms).sum::<usize>(),
        Object::Ombind { binder, ctx, body } => {
            1 + count_subterms(binder)
                + ctx.iter().filter_map(|d| d.ty.as_ref()).map(count_subterms).sum::<usize>()
                + count_subterms(body)
        }
    }
}

/// A library of one theory whose constant types and definientia together
/// have at most `max_subterms` subobjects.
pub fn gen_library(rng: &mut impl Rng, max_subterms: usize) -> Library {
    let theory = "urn:o?T";
    let mut lib = Library::empty();
    let mut budget = max_subterms;
    let mut names = Vec::new();
    for i in 0..rng.gen_range(1..=5) {
        let ty = budgeted_object(rng, &mut budget);
        let def = budgeted_object(rng, &mut budget);
        let uri = format!("{theory}?c{i}");
        names.push(uri.clone());
        lib.add_constant(Constant {
            uri,
            theory: theory.into(),
            ty,
            def,
        })
        .unwrap();
    }
    lib.add_theory(Theory {
        uri: theory.into(),
        includes: vec![],
        typesystem: None,
        constants: names,
    })
    .unwrap();
    lib
}

fn budgeted_object(rng: &mut impl Rng, budget: &mut usize) -> Option<Object> {
    if !rng.gen_bool(0.7) {
        return None;
    }
    let depth = rng.gen_range(0..=3);
    let o = gen_object(rng, depth, &[]);
    let n = count_subterms(&o);
    (n <= *budget).then(|| {
        *budget -= n;
        o
    })
}

/// Literal helper for tests that build ASTs by hand.
pub fn uri_lit(base: &str, u: &str) -> QueryExpr {
    QueryExpr::Literal(Literal {
        base: base.into(),
        value: LiteralValue::Str(u.into()),
    })
}

/// The declarations of [`SIGNATURE`].
pub fn signature_decls() -> Vec<SignatureDecl> {
    qmt::frontend::parse_signature(SIGNATURE).unwrap()
}
