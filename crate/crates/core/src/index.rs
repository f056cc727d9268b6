//! A-priori indices: a set per concept and a forward/backward adjacency map
//! per relation. Relation expressions are evaluated as images of single
//! values, so closures are only explored from the nodes a query touches.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::kernel::{BaseTypeName, ConceptName, RelExpr, RelationName, Signature, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fact {
    Concept(ConceptName, Value),
    Relation(RelationName, Value, Value),
}

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("{symbol} is not a declared {kind}")]
    UnknownSymbol { symbol: String, kind: &'static str },
    #[error("{value} is not an element of {expected} in fact for {symbol}")]
    TypeMismatch {
        symbol: String,
        value: Value,
        expected: BaseTypeName,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed cache: {0}")]
    Format(#[from] serde_json::Error),
    #[error("not a qmt index cache, or unsupported version {0}")]
    Version(u32),
    #[error("cache was built for library {found}, expected {expected}")]
    Stale { expected: String, found: String },
}

pub type ConceptIndex = HashMap<ConceptName, BTreeSet<Value>>;

#[derive(Clone, Debug, Default)]
pub struct Adjacency {
    pub forward: HashMap<Value, BTreeSet<Value>>,
    pub backward: HashMap<Value, BTreeSet<Value>>,
}

pub type RelationIndex = HashMap<RelationName, Adjacency>;

#[derive(Clone, Debug, Default)]
pub struct Index {
    pub concepts: ConceptIndex,
    pub relations: RelationIndex,
}

static EMPTY: BTreeSet<Value> = BTreeSet::new();

/// Checks every fact against the signature and the base type membership
/// test, then builds the index.
pub fn build_index(
    sig: &Signature,
    facts: impl IntoIterator<Item = Fact>,
    member: &dyn Fn(&BaseTypeName, &Value) -> bool,
) -> Result<Index, IndexError> {
    let mut idx = Index::default();
    let check = |symbol: &str, v: &Value, a: &BaseTypeName| {
        if member(a, v) {
            Ok(())
        } else {
            Err(IndexError::TypeMismatch {
                symbol: symbol.to_owned(),
                value: v.clone(),
                expected: a.clone(),
            })
        }
    };
    for f in facts {
        match &f {
            Fact::Concept(c, v) => {
                let a = sig.concept(c).ok_or_else(|| IndexError::UnknownSymbol {
                    symbol: c.to_string(),
                    kind: "concept",
                })?;
                check(c.as_str(), v, a)?;
            }
            Fact::Relation(r, u, v) => {
                let (a, b) = sig.relation(r).ok_or_else(|| IndexError::UnknownSymbol {
                    symbol: r.to_string(),
                    kind: "relation",
                })?;
                check(r.as_str(), u, a)?;
                check(r.as_str(), v, b)?;
            }
        }
        idx.insert(f);
    }
    Ok(idx)
}

impl Index {
    /// Inserts without sort checks.
    pub fn insert(&mut self, f: Fact) {
        match f {
            Fact::Concept(c, v) => {
                self.concepts.entry(c).or_default().insert(v);
            }
            Fact::Relation(r, u, v) => {
                let adj = self.relations.entry(r).or_default();
                adj.forward.entry(u.clone()).or_default().insert(v.clone());
                adj.backward.entry(v).or_default().insert(u);
            }
        }
    }

    pub fn concept(&self, c: &ConceptName) -> &BTreeSet<Value> {
        self.concepts.get(c).unwrap_or(&EMPTY)
    }

    /// All facts, in a deterministic order.
    pub fn facts(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        let mut cs: Vec<_> = self.concepts.iter().collect();
        cs.sort_by(|a, b| a.0.cmp(b.0));
        for (c, vs) in cs {
            out.extend(vs.iter().map(|v| Fact::Concept(c.clone(), v.clone())));
        }
        let mut rs: Vec<_> = self.relations.iter().collect();
        rs.sort_by(|a, b| a.0.cmp(b.0));
        for (r, adj) in rs {
            let mut fwd: Vec<_> = adj.forward.iter().collect();
            fwd.sort_by(|a, b| a.0.cmp(b.0));
            for (u, vs) in fwd {
                out.extend(vs.iter().map(|v| Fact::Relation(r.clone(), u.clone(), v.clone())));
            }
        }
        out
    }

    fn step(&self, r: &RelationName, u: &Value, inverted: bool) -> &BTreeSet<Value> {
        self.relations
            .get(r)
            .and_then(|adj| {
                if inverted {
                    adj.backward.get(u)
                } else {
                    adj.forward.get(u)
                }
            })
            .unwrap_or(&EMPTY)
    }

    /// `{v | (u,v) ∈ ⟦R⟧}`.
    pub fn image(&self, r: &RelExpr, u: &Value) -> BTreeSet<Value> {
        self.image_memo(r, u, &mut ImageMemo::default())
    }

    /// Like [`Index::image`], caching closure images in `memo`. A memo is
    /// keyed by node address and must not outlive the expression.
    pub fn image_memo(&self, r: &RelExpr, u: &Value, memo: &mut ImageMemo) -> BTreeSet<Value> {
        self.image_dir(r, u, false, memo)
    }

    fn image_dir(&self, r: &RelExpr, u: &Value, inv: bool, memo: &mut ImageMemo) -> BTreeSet<Value> {
        match r {
            RelExpr::Atomic(name) => self.step(name, u, inv).clone(),
            RelExpr::Inverse(inner) => self.image_dir(inner, u, !inv, memo),
            RelExpr::Compose(first, second) => {
                let (a, b) = if inv { (second, first) } else { (first, second) };
                let mut out = BTreeSet::new();
                for mid in self.image_dir(a, u, inv, memo) {
                    out.extend(self.image_dir(b, &mid, inv, memo));
                }
                out
            }
            RelExpr::Union(a, b) => {
                let mut out = self.image_dir(a, u, inv, memo);
                out.extend(self.image_dir(b, u, inv, memo));
                out
            }
            RelExpr::Intersect(a, b) => {
                let left = self.image_dir(a, u, inv, memo);
                if left.is_empty() {
                    return left;
                }
                let right = self.image_dir(b, u, inv, memo);
                left.intersection(&right).cloned().collect()
            }
            RelExpr::Diff(a, b) => {
                let left = self.image_dir(a, u, inv, memo);
                if left.is_empty() {
                    return left;
                }
                let right = self.image_dir(b, u, inv, memo);
                left.difference(&right).cloned().collect()
            }
            RelExpr::TransClosure(inner) => {
                let key = (r as *const RelExpr as usize, inv, u.clone());
                if let Some(hit) = memo.closures.get(&key) {
                    return hit.clone();
                }
                let mut reached = BTreeSet::new();
                let mut frontier: Vec<Value> = self.image_dir(inner, u, inv, memo).into_iter().collect();
                while let Some(v) = frontier.pop() {
                    if reached.contains(&v) {
                        continue;
                    }
                    for w in self.image_dir(inner, &v, inv, memo) {
                        if !reached.contains(&w) {
                            frontier.push(w);
                        }
                    }
                    reached.insert(v);
                }
                memo.closures.insert(key, reached.clone());
                reached
            }
        }
    }

    pub fn save(&self, out: impl Write, library_hash: &str) -> Result<(), CacheError> {
        let mut concepts = Vec::new();
        let mut relations = Vec::new();
        for f in self.facts() {
            match f {
                Fact::Concept(c, v) => concepts.push(WireConcept {
                    concept: c.to_string(),
                    value: v,
                }),
                Fact::Relation(r, u, v) => relations.push(WireRelation {
                    relation: r.to_string(),
                    from: u,
                    to: v,
                }),
            }
        }
        let doc = CacheFile {
            format: CACHE_FORMAT.into(),
            version: CACHE_VERSION,
            library_hash: library_hash.to_owned(),
            concepts,
            relations,
        };
        serde_json::to_writer(out, &doc)?;
        Ok(())
    }

    /// Loads a cache written by [`Index::save`], rejecting it unless it was
    /// built for `library_hash`.
    pub fn load(input: impl Read, library_hash: &str) -> Result<Index, CacheError> {
        let doc: CacheFile = serde_json::from_reader(input)?;
        if doc.format != CACHE_FORMAT || doc.version != CACHE_VERSION {
            return Err(CacheError::Version(doc.version));
        }
        if doc.library_hash != library_hash {
            return Err(CacheError::Stale {
                expected: library_hash.to_owned(),
                found: doc.library_hash,
            });
        }
        let mut idx = Index::default();
        for c in doc.concepts {
            idx.insert(Fact::Concept(ConceptName::new(c.concept), c.value));
        }
        for r in doc.relations {
            idx.insert(Fact::Relation(RelationName::new(r.relation), r.from, r.to));
        }
        Ok(idx)
    }
}

/// Per-evaluation cache of transitive closure images.
#[derive(Default)]
pub struct ImageMemo {
    closures: HashMap<(usize, bool, Value), BTreeSet<Value>>,
}

const CACHE_FORMAT: &str = "qmt-index";
const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    library_hash: String,
    concepts: Vec<WireConcept>,
    relations: Vec<WireRelation>,
}

#[derive(Serialize, Deserialize)]
struct WireConcept {
    concept: String,
    value: Value,
}

#[derive(Serialize, Deserialize)]
struct WireRelation {
    relation: String,
    from: Value,
    to: Value,
}
