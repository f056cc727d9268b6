use std::fmt;

use super::names::{BaseTypeName, VarName};

/// A product `⟨a₁,…,aₙ⟩` of base types, `n ≥ 1`. A one-component product is
/// the base type itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimpleType(Vec<BaseTypeName>);

impl SimpleType {
    /// Panics if `components` is empty.
    pub fn new(components: Vec<BaseTypeName>) -> Self {
        assert!(!components.is_empty(), "simple types have at least one component");
        SimpleType(components)
    }

    pub fn base(a: impl Into<BaseTypeName>) -> Self {
        SimpleType(vec![a.into()])
    }

    pub fn components(&self) -> &[BaseTypeName] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// `Some(a)` when this is a single base type.
    pub fn as_base(&self) -> Option<&BaseTypeName> {
        match self.0.as_slice() {
            [a] => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [a] => write!(f, "{a}"),
            cs => {
                f.write_str("(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Either an element type `t` or a set type `{t}`; sets never nest.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneralType {
    Elem(SimpleType),
    Set(SimpleType),
}

impl GeneralType {
    pub fn elem(a: impl Into<BaseTypeName>) -> Self {
        GeneralType::Elem(SimpleType::base(a))
    }

    pub fn set(a: impl Into<BaseTypeName>) -> Self {
        GeneralType::Set(SimpleType::base(a))
    }

    pub fn simple(&self) -> &SimpleType {
        match self {
            GeneralType::Elem(t) | GeneralType::Set(t) => t,
        }
    }

    pub fn is_set(&self) -> bool {
        matches!(self, GeneralType::Set(_))
    }
}

impl fmt::Display for GeneralType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneralType::Elem(t) => write!(f, "{t}"),
            GeneralType::Set(t) => write!(f, "{{{t}}}"),
        }
    }
}

/// Variables bound at simple types. Names are pairwise distinct: extending
/// with an existing name drops the older binding.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Context(Vec<(VarName, SimpleType)>);

impl Context {
    pub fn new() -> Self {
        Context(Vec::new())
    }

    pub fn extend(&self, x: VarName, t: SimpleType) -> Context {
        let mut v: Vec<_> = self.0.iter().filter(|(y, _)| *y != x).cloned().collect();
        v.push((x, t));
        Context(v)
    }

    pub fn lookup(&self, x: &VarName) -> Option<&SimpleType> {
        self.0.iter().rev().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(VarName, SimpleType)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(VarName, SimpleType)> for Context {
    fn from_iter<I: IntoIterator<Item = (VarName, SimpleType)>>(iter: I) -> Self {
        iter.into_iter()
            .fold(Context::new(), |ctx, (x, t)| ctx.extend(x, t))
    }
}
