//! The textual query syntax: parser and printer.
//!
//! Identifiers resolve to bound variables first and to concepts otherwise.
//! Sugar forms are desugared while parsing, so printing yields kernel syntax.

use std::fmt::Write as _;

use super::lexer::{tokenize, ParseError, Pos, Tok};
use crate::kernel::{
    BaseTypeName, GeneralType, Literal, LiteralValue, PropExpr, QueryExpr, RelExpr, SignatureDecl,
    SimpleType, VarName,
};
use crate::sugar;

const KEYWORDS: [&str; 13] = [
    "union", "in", "of", "forall", "inv", "select", "from", "as", "where", "for", "let", "return", "box",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn parse_query(src: &str) -> Result<QueryExpr, ParseError> {
    let mut p = Parser::new(src, true)?;
    let q = p.query()?;
    p.end()?;
    Ok(q)
}

pub fn parse_prop(src: &str) -> Result<PropExpr, ParseError> {
    let mut p = Parser::new(src, true)?;
    let f = p.prop()?;
    p.end()?;
    Ok(f)
}

pub fn parse_relation(src: &str) -> Result<RelExpr, ParseError> {
    let mut p = Parser::new(src, true)?;
    let r = p.rel0()?;
    p.end()?;
    Ok(r)
}

/// Parses a sequence of declarations such as
///
/// ```text
/// type uri
/// concept theory : uri
/// relation includes : uri -> uri
/// function typeOF : uri -> obj
/// indexed function subobjat : obj -> obj
/// function unify : obj -> {(uri, obj, obj)}
/// predicate occurs : uri, obj
/// ```
///
/// An empty argument list is written `()`; `;` between declarations is
/// optional.
pub fn parse_signature(src: &str) -> Result<Vec<SignatureDecl>, ParseError> {
    let mut p = Parser::new(src, false)?;
    let mut out = Vec::new();
    loop {
        while p.eat_punct(";") {}
        if p.peek() == &Tok::Eof {
            return Ok(out);
        }
        out.push(p.decl()?);
    }
}

pub fn parse_type(src: &str) -> Result<GeneralType, ParseError> {
    let mut p = Parser::new(src, false)?;
    let t = p.general_type()?;
    p.end()?;
    Ok(t)
}

/// A comma-separated list of types, possibly empty.
pub fn parse_type_list(src: &str) -> Result<Vec<GeneralType>, ParseError> {
    let mut p = Parser::new(src, false)?;
    let out = p.type_list(";")?;
    p.end()?;
    Ok(out)
}

type PResult<T> = Result<T, ParseError>;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    scope: Vec<VarName>,
    /// Set while parsing a comprehension domain, where a bare `|` ends the domain.
    no_bar: bool,
}

impl Parser {
    fn new(src: &str, literals: bool) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(src, literals)?,
            at: 0,
            scope: Vec::new(),
            no_bar: false,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::new(self.pos(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn end(&self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.unexpected("end of input"),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.is_punct(p);
        if hit {
            self.bump();
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.is_kw(k);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("a name"),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.unexpected("an integer"),
        }
    }

    fn positive(&mut self, what: &str) -> PResult<usize> {
        let pos = self.pos();
        match self.int()? {
            0 => Err(ParseError::new(pos, format!("{what} are 1-based"))),
            n => usize::try_from(n).map_err(|_| ParseError::new(pos, "integer out of range")),
        }
    }

    /// Runs `f` with `|` allowed again, e.g. inside brackets.
    fn nested<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let saved = std::mem::replace(&mut self.no_bar, false);
        let r = f(self);
        self.no_bar = saved;
        r
    }

    fn bound<T>(&mut self, xs: &[VarName], f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        let mark = self.scope.len();
        self.scope.extend(xs.iter().cloned());
        let r = f(self);
        self.scope.truncate(mark);
        r
    }

    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let (at, scope, no_bar) = (self.at, self.scope.len(), self.no_bar);
        match f(self) {
            Ok(t) => Some(t),
            Err(_) => {
                self.at = at;
                self.scope.truncate(scope);
                self.no_bar = no_bar;
                None
            }
        }
    }

    // ---- queries ----

    fn query(&mut self) -> PResult<QueryExpr> {
        if self.is_kw("union") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            let x = VarName::new(self.name()?);
            self.expect_kw("in")?;
            let domain = self.query()?;
            self.expect_punct(".")?;
            let body = self.bound(std::slice::from_ref(&x), Self::query)?;
            return Ok(QueryExpr::big_union(x, domain, body));
        }
        if self.eat_kw("select") {
            return self.select();
        }
        if self.eat_kw("for") {
            return self.for_let();
        }
        if self.eat_kw("box") {
            self.expect_punct("^")?;
            let c = self.name()?;
            let r = self.rel0()?;
            self.expect_punct(".")?;
            let target = self.query()?;
            return Ok(sugar::desugar_dl_box(c.into(), r, target));
        }
        let image = self.attempt(|p| {
            let r = p.rel0()?;
            p.expect_kw("of")?;
            Ok(r)
        });
        if let Some(r) = image {
            let arg = self.query()?;
            return Ok(QueryExpr::image(r, arg));
        }
        self.postfix()
    }

    fn select(&mut self) -> PResult<QueryExpr> {
        let mut indices = vec![self.positive("selected positions")?];
        while self.eat_punct(",") {
            indices.push(self.positive("selected positions")?);
        }
        self.expect_kw("from")?;
        let from = self.query()?;
        let mut vars = Vec::new();
        if self.eat_kw("as") {
            vars.push(VarName::new(self.name()?));
            while self.eat_punct(",") {
                vars.push(VarName::new(self.name()?));
            }
        }
        let filter = if self.eat_kw("where") {
            Some(self.bound(&vars, Self::prop)?)
        } else {
            None
        };
        Ok(sugar::desugar_select(&indices, from, &vars, filter))
    }

    fn for_let(&mut self) -> PResult<QueryExpr> {
        let x = VarName::new(self.name()?);
        self.expect_kw("in")?;
        let domain = self.query()?;
        self.expect_kw("let")?;
        let y = VarName::new(self.name()?);
        self.expect_punct("=")?;
        let value = self.bound(std::slice::from_ref(&x), Self::query)?;
        let both = [x.clone(), y.clone()];
        let filter = if self.eat_kw("where") {
            Some(self.bound(&both, Self::prop)?)
        } else {
            None
        };
        self.expect_kw("return")?;
        let ret = self.bound(&both, Self::query)?;
        Ok(sugar::desugar_for_let(x, domain, y, value, filter, ret))
    }

    fn postfix(&mut self) -> PResult<QueryExpr> {
        let mut q = self.primary()?;
        while self.is_punct(".") && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            q = q.proj(self.positive("projections")?);
        }
        Ok(q)
    }

    fn args(&mut self) -> PResult<Vec<QueryExpr>> {
        self.expect_punct("(")?;
        self.nested(|p| {
            let mut args = Vec::new();
            if !p.is_punct(")") {
                args.push(p.query()?);
                while p.eat_punct(",") {
                    args.push(p.query()?);
                }
            }
            p.expect_punct(")")?;
            Ok(args)
        })
    }

    fn primary(&mut self) -> PResult<QueryExpr> {
        match self.peek().clone() {
            Tok::Str { base, value } => {
                self.bump();
                Ok(QueryExpr::Literal(Literal {
                    base: base.into(),
                    value: LiteralValue::Str(value),
                }))
            }
            Tok::Obj { base, value } => {
                self.bump();
                Ok(QueryExpr::Literal(Literal {
                    base: base.into(),
                    value: LiteralValue::Obj(value),
                }))
            }
            Tok::Ident(s) if s == "union" && matches!(self.peek_at(1), Tok::Punct("(")) => {
                self.bump();
                Ok(QueryExpr::apply(sugar::UNION, self.args()?))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                if self.is_punct("(") {
                    return Ok(QueryExpr::apply(s, self.args()?));
                }
                if self.is_punct("[") && matches!(self.peek_at(2), Tok::Punct("]")) {
                    self.bump();
                    let pos = self.pos();
                    let i = self.int()?;
                    let i = u32::try_from(i).map_err(|_| ParseError::new(pos, "index out of range"))?;
                    self.expect_punct("]")?;
                    return Ok(QueryExpr::apply_indexed(s, i, self.args()?));
                }
                let x = VarName::new(s);
                if self.scope.contains(&x) {
                    Ok(QueryExpr::Var(x))
                } else {
                    Ok(QueryExpr::concept(x.as_str()))
                }
            }
            Tok::Punct("(") => {
                self.bump();
                self.nested(|p| {
                    if p.eat_punct(")") {
                        return Ok(QueryExpr::Tuple(Vec::new()));
                    }
                    let first = p.query()?;
                    if p.eat_punct(")") {
                        return Ok(first);
                    }
                    let mut items = vec![first];
                    while p.eat_punct(",") {
                        if p.is_punct(")") {
                            break;
                        }
                        items.push(p.query()?);
                    }
                    p.expect_punct(")")?;
                    Ok(QueryExpr::Tuple(items))
                })
            }
            Tok::Punct("{") => {
                self.bump();
                self.nested(Self::braces)
            }
            _ => self.unexpected("a query"),
        }
    }

    fn braces(&mut self) -> PResult<QueryExpr> {
        if let Tok::Ident(x) = self.peek().clone() {
            if !is_keyword(&x) && matches!(self.peek_at(1), Tok::Ident(k) if k == "in") {
                self.bump();
                self.bump();
                self.no_bar = true;
                let domain = self.query()?;
                self.no_bar = false;
                self.expect_punct("|")?;
                let x = VarName::new(x);
                let filter = self.bound(std::slice::from_ref(&x), Self::prop)?;
                self.expect_punct("}")?;
                return Ok(QueryExpr::comprehension(x, domain, filter));
            }
        }
        let body = self.query()?;
        if self.eat_punct("}") {
            return Ok(QueryExpr::apply(sugar::SINGLETON, vec![body]));
        }
        self.expect_punct(":")?;
        let mut bindings: Vec<(VarName, QueryExpr)> = Vec::new();
        loop {
            let x = VarName::new(self.name()?);
            self.expect_kw("in")?;
            let vars: Vec<VarName> = bindings.iter().map(|(v, _)| v.clone()).collect();
            let domain = self.bound(&vars, Self::query)?;
            bindings.push((x, domain));
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct("}")?;
        // The body was read before its binders were known.
        let names: Vec<VarName> = bindings.iter().map(|(v, _)| v.clone()).collect();
        let body = concepts_to_vars(&body, &names);
        Ok(sugar::desugar_multi_replacement(bindings, body))
    }

    // ---- relations ----

    fn rel0(&mut self) -> PResult<RelExpr> {
        let mut r = self.rel1()?;
        loop {
            if self.is_punct("|") && !self.no_bar {
                self.bump();
                r = r.union(self.rel1()?);
            } else if self.eat_punct("&") {
                r = r.intersect(self.rel1()?);
            } else if self.eat_punct("\\") {
                r = r.minus(self.rel1()?);
            } else {
                return Ok(r);
            }
        }
    }

    fn rel1(&mut self) -> PResult<RelExpr> {
        let mut r = self.rel2()?;
        while self.eat_punct(";") {
            r = r.then(self.rel2()?);
        }
        Ok(r)
    }

    fn rel2(&mut self) -> PResult<RelExpr> {
        if self.eat_kw("inv") {
            return Ok(self.rel2()?.inv());
        }
        let mut r = if self.eat_punct("(") {
            let r = self.nested(Self::rel0)?;
            self.expect_punct(")")?;
            r
        } else {
            RelExpr::atom(self.name()?)
        };
        while self.eat_punct("+") {
            r = r.plus();
        }
        Ok(r)
    }

    // ---- propositions ----

    fn prop(&mut self) -> PResult<PropExpr> {
        let mut f = self.unary()?;
        while self.eat_punct("&&") {
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<PropExpr> {
        if self.eat_punct("!") {
            return Ok(self.unary()?.not());
        }
        if self.eat_kw("forall") {
            let x = VarName::new(self.name()?);
            self.expect_kw("in")?;
            let domain = self.query()?;
            self.expect_punct(".")?;
            let body = self.bound(std::slice::from_ref(&x), Self::prop)?;
            return Ok(PropExpr::forall(x, domain, body));
        }
        self.atom()
    }

    fn followed_by_relation_op(&self) -> bool {
        self.is_punct("=") || self.is_kw("in") || self.is_punct(".")
    }

    fn atom(&mut self) -> PResult<PropExpr> {
        if self.is_punct("(") {
            let grouped = self.attempt(|p| {
                p.bump();
                let f = p.nested(Self::prop)?;
                p.expect_punct(")")?;
                if p.followed_by_relation_op() {
                    return p.error("not a proposition");
                }
                Ok(f)
            });
            if let Some(f) = grouped {
                return Ok(f);
            }
        }
        let call = match self.peek() {
            Tok::Ident(s) if s == "in" || !is_keyword(s) => {
                matches!(self.peek_at(1), Tok::Punct("("))
            }
            _ => false,
        };
        if call {
            let pred = self.attempt(|p| {
                let Tok::Ident(name) = p.bump() else { unreachable!() };
                let args = p.args()?;
                if p.followed_by_relation_op() {
                    return p.error("not a predicate");
                }
                Ok(PropExpr::pred(name, args))
            });
            if let Some(f) = pred {
                return Ok(f);
            }
        }
        let lhs = self.query()?;
        let name = if self.eat_punct("=") {
            sugar::EQ
        } else if self.eat_kw("in") {
            sugar::ELEM
        } else {
            return self.unexpected("`=`, `in` or a predicate");
        };
        let rhs = self.query()?;
        Ok(PropExpr::pred(name, vec![lhs, rhs]))
    }

    // ---- signatures ----

    fn simple_type(&mut self) -> PResult<SimpleType> {
        if self.eat_punct("(") {
            let mut cs = vec![BaseTypeName::new(self.name()?)];
            while self.eat_punct(",") {
                cs.push(BaseTypeName::new(self.name()?));
            }
            self.expect_punct(")")?;
            if cs.len() < 2 {
                return self.error("a tuple type has at least two components");
            }
            Ok(SimpleType::new(cs))
        } else {
            Ok(SimpleType::base(self.name()?))
        }
    }

    fn general_type(&mut self) -> PResult<GeneralType> {
        if self.eat_punct("{") {
            let t = self.simple_type()?;
            self.expect_punct("}")?;
            Ok(GeneralType::Set(t))
        } else {
            Ok(GeneralType::Elem(self.simple_type()?))
        }
    }

    fn type_list(&mut self, stop: &str) -> PResult<Vec<GeneralType>> {
        let mut out = Vec::new();
        if self.is_punct(stop) || self.peek() == &Tok::Eof {
            return Ok(out);
        }
        if self.is_punct("(") && self.peek_at(1) == &Tok::Punct(")") {
            self.bump();
            self.bump();
            return Ok(out);
        }
        out.push(self.general_type()?);
        while self.eat_punct(",") {
            out.push(self.general_type()?);
        }
        Ok(out)
    }

    fn decl(&mut self) -> PResult<SignatureDecl> {
        let pos = self.pos();
        let word = match self.bump() {
            Tok::Ident(w) => w,
            other => return Err(ParseError::new(pos, format!("expected a declaration, found {other}"))),
        };
        match word.as_str() {
            "type" => Ok(SignatureDecl::BaseType(self.name()?.into())),
            "concept" => {
                let name = self.name()?.into();
                self.expect_punct(":")?;
                Ok(SignatureDecl::Concept {
                    name,
                    of: self.name()?.into(),
                })
            }
            "relation" => {
                let name = self.name()?.into();
                self.expect_punct(":")?;
                let from = self.name()?.into();
                self.expect_punct("->")?;
                Ok(SignatureDecl::Relation {
                    name,
                    from,
                    to: self.name()?.into(),
                })
            }
            "function" | "indexed" => {
                let indexed = word == "indexed";
                if indexed {
                    self.expect_kw("function")?;
                }
                let name = self.name()?.into();
                self.expect_punct(":")?;
                let args = self.type_list("->")?;
                self.expect_punct("->")?;
                Ok(SignatureDecl::Function {
                    name,
                    indexed,
                    args,
                    result: self.general_type()?,
                })
            }
            "predicate" => {
                let name = self.name()?.into();
                self.expect_punct(":")?;
                Ok(SignatureDecl::Predicate {
                    name,
                    args: self.type_list(";")?,
                })
            }
            _ => Err(ParseError::new(pos, format!("unknown declaration keyword `{word}`"))),
        }
    }
}

fn concepts_to_vars(q: &QueryExpr, names: &[VarName]) -> QueryExpr {
    let rec = |q: &QueryExpr| concepts_to_vars(q, names);
    match q {
        QueryExpr::Concept(c) if names.iter().any(|x| x.as_str() == c.as_str()) => {
            QueryExpr::var(c.as_str())
        }
        QueryExpr::Concept(_) | QueryExpr::Var(_) | QueryExpr::Literal(_) => q.clone(),
        QueryExpr::Apply { fun, index, args } => QueryExpr::Apply {
            fun: fun.clone(),
            index: *index,
            args: args.iter().map(rec).collect(),
        },
        QueryExpr::Tuple(items) => QueryExpr::Tuple(items.iter().map(rec).collect()),
        QueryExpr::Proj(inner, i) => rec(inner).proj(*i),
        QueryExpr::Image(r, arg) => QueryExpr::image(r.clone(), rec(arg)),
        QueryExpr::BigUnion { var, domain, body } => {
            QueryExpr::big_union(var.clone(), rec(domain), rec(body))
        }
        QueryExpr::Comprehension {
            var,
            domain,
            filter,
        } => QueryExpr::comprehension(var.clone(), rec(domain), prop_concepts_to_vars(filter, names)),
    }
}

fn prop_concepts_to_vars(f: &PropExpr, names: &[VarName]) -> PropExpr {
    match f {
        PropExpr::Pred { name, args } => PropExpr::pred(
            name.clone(),
            args.iter().map(|a| concepts_to_vars(a, names)).collect(),
        ),
        PropExpr::Not(g) => prop_concepts_to_vars(g, names).not(),
        PropExpr::And(a, b) => prop_concepts_to_vars(a, names).and(prop_concepts_to_vars(b, names)),
        PropExpr::ForallIn { var, domain, body } => PropExpr::forall(
            var.clone(),
            concepts_to_vars(domain, names),
            prop_concepts_to_vars(body, names),
        ),
    }
}

// ---- printing ----

fn rel_level(r: &RelExpr) -> u8 {
    match r {
        RelExpr::Union(..) | RelExpr::Intersect(..) | RelExpr::Diff(..) => 0,
        RelExpr::Compose(..) => 1,
        RelExpr::Inverse(_) => 2,
        RelExpr::TransClosure(_) => 3,
        RelExpr::Atomic(_) => 4,
    }
}

fn write_rel(out: &mut String, r: &RelExpr, min: u8) {
    let paren = rel_level(r) < min;
    if paren {
        out.push('(');
    }
    match r {
        RelExpr::Atomic(n) => out.push_str(n.as_str()),
        RelExpr::Inverse(a) => {
            out.push_str("inv ");
            write_rel(out, a, 2);
        }
        RelExpr::TransClosure(a) => {
            write_rel(out, a, 3);
            out.push('+');
        }
        RelExpr::Compose(a, b) => {
            write_rel(out, a, 1);
            out.push_str(" ; ");
            write_rel(out, b, 2);
        }
        RelExpr::Union(a, b) | RelExpr::Intersect(a, b) | RelExpr::Diff(a, b) => {
            let op = match r {
                RelExpr::Union(..) => " | ",
                RelExpr::Intersect(..) => " & ",
                _ => " \\ ",
            };
            write_rel(out, a, 0);
            out.push_str(op);
            write_rel(out, b, 1);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn print_relation(r: &RelExpr) -> String {
    let mut s = String::new();
    write_rel(&mut s, r, 0);
    s
}

fn write_literal(out: &mut String, lit: &Literal) {
    out.push_str(lit.base.as_str());
    match &lit.value {
        LiteralValue::Str(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        LiteralValue::Obj(o) => {
            out.push('<');
            out.push_str(&o.to_json().to_string());
            out.push('>');
        }
    }
}

fn is_loose(q: &QueryExpr) -> bool {
    matches!(q, QueryExpr::Image(..) | QueryExpr::BigUnion { .. })
}

/// Prints `q`, parenthesized if it would extend to the right.
fn write_tight(out: &mut String, q: &QueryExpr) {
    if is_loose(q) {
        out.push('(');
        write_query(out, q);
        out.push(')');
    } else {
        write_query(out, q);
    }
}

fn write_list(out: &mut String, qs: &[QueryExpr]) {
    for (i, q) in qs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_query(out, q);
    }
}

fn write_query(out: &mut String, q: &QueryExpr) {
    match q {
        QueryExpr::Concept(c) => out.push_str(c.as_str()),
        QueryExpr::Var(x) => out.push_str(x.as_str()),
        QueryExpr::Literal(lit) => write_literal(out, lit),
        QueryExpr::Apply { fun, index, args } => {
            if index.is_none() && fun.as_str() == sugar::SINGLETON && args.len() == 1 {
                out.push('{');
                write_query(out, &args[0]);
                out.push('}');
                return;
            }
            out.push_str(fun.as_str());
            if let Some(i) = index {
                let _ = write!(out, "[{i}]");
            }
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        QueryExpr::Tuple(items) => {
            out.push('(');
            write_list(out, items);
            if items.len() == 1 {
                out.push(',');
            }
            out.push(')');
        }
        QueryExpr::Proj(inner, i) => {
            write_tight(out, inner);
            let _ = write!(out, ".{i}");
        }
        QueryExpr::Image(r, arg) => {
            write_rel(out, r, 1);
            out.push_str(" of ");
            write_query(out, arg);
        }
        QueryExpr::BigUnion { var, domain, body } => {
            let _ = write!(out, "union {var} in ");
            write_tight(out, domain);
            out.push_str(" . ");
            write_query(out, body);
        }
        QueryExpr::Comprehension {
            var,
            domain,
            filter,
        } => {
            let _ = write!(out, "{{{var} in ");
            write_tight(out, domain);
            out.push_str(" | ");
            write_prop(out, filter);
            out.push('}');
        }
    }
}

fn write_prop_operand(out: &mut String, f: &PropExpr, allow_and: bool) {
    let paren = match f {
        PropExpr::ForallIn { .. } => true,
        PropExpr::And(..) => !allow_and,
        _ => false,
    };
    if paren {
        out.push('(');
    }
    write_prop(out, f);
    if paren {
        out.push(')');
    }
}

fn write_prop(out: &mut String, f: &PropExpr) {
    match f {
        PropExpr::Pred { name, args } => {
            let infix = match name.as_str() {
                sugar::EQ => Some(" = "),
                sugar::ELEM => Some(" in "),
                _ => None,
            };
            match (infix, args.as_slice()) {
                (Some(op), [a, b]) => {
                    write_tight(out, a);
                    out.push_str(op);
                    write_tight(out, b);
                }
                _ => {
                    out.push_str(name.as_str());
                    out.push('(');
                    write_list(out, args);
                    out.push(')');
                }
            }
        }
        PropExpr::Not(g) => {
            out.push('!');
            write_prop_operand(out, g, false);
        }
        PropExpr::And(a, b) => {
            write_prop_operand(out, a, true);
            out.push_str(" && ");
            write_prop_operand(out, b, false);
        }
        PropExpr::ForallIn { var, domain, body } => {
            let _ = write!(out, "forall {var} in ");
            write_tight(out, domain);
            out.push_str(" . ");
            write_prop(out, body);
        }
    }
}

pub fn print_query(q: &QueryExpr) -> String {
    let mut s = String::new();
    write_query(&mut s, q);
    s
}

pub fn print_prop(f: &PropExpr) -> String {
    let mut s = String::new();
    write_prop(&mut s, f);
    s
}

fn write_type_list(out: &mut String, ts: &[GeneralType]) {
    if ts.is_empty() {
        out.push_str("()");
    }
    for (i, t) in ts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}", print_type(t));
    }
}

pub fn print_type(t: &GeneralType) -> String {
    fn simple(t: &SimpleType) -> String {
        match t.components() {
            [a] => a.to_string(),
            cs => format!(
                "({})",
                cs.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ")
            ),
        }
    }
    match t {
        GeneralType::Elem(s) => simple(s),
        GeneralType::Set(s) => format!("{{{}}}", simple(s)),
    }
}

pub fn print_type_list(ts: &[GeneralType]) -> String {
    let mut s = String::new();
    write_type_list(&mut s, ts);
    s
}

pub fn print_decl(d: &SignatureDecl) -> String {
    match d {
        SignatureDecl::BaseType(a) => format!("type {a}"),
        SignatureDecl::Concept { name, of } => format!("concept {name} : {of}"),
        SignatureDecl::Relation { name, from, to } => format!("relation {name} : {from} -> {to}"),
        SignatureDecl::Function {
            name,
            indexed,
            args,
            result,
        } => {
            let mut s = String::new();
            if *indexed {
                s.push_str("indexed ");
            }
            let _ = write!(s, "function {name} : ");
            write_type_list(&mut s, args);
            let _ = write!(s, " -> {}", print_type(result));
            s
        }
        SignatureDecl::Predicate { name, args } => {
            let mut s = format!("predicate {name} : ");
            write_type_list(&mut s, args);
            s
        }
    }
}

pub fn print_signature(decls: &[SignatureDecl]) -> String {
    let mut s = String::new();
    for d in decls {
        s.push_str(&print_decl(d));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::Object;

    fn roundtrip(src: &str) -> QueryExpr {
        let q = parse_query(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let printed = print_query(&q);
        let again = parse_query(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(again, q, "{printed}");
        q
    }

    #[test]
    fn concept_and_variables() {
        assert_eq!(roundtrip("theory"), QueryExpr::concept("theory"));
        assert_eq!(
            roundtrip("union x in theory . {x}"),
            QueryExpr::big_union(
                "x",
                QueryExpr::concept("theory"),
                QueryExpr::apply(sugar::SINGLETON, vec![QueryExpr::var("x")])
            )
        );
    }

    #[test]
    fn constants_example() {
        let q = roundtrip(
            r#"{ x in (includes+ ; declares) of uri"urn:a?u" | occurs(uri"urn:a?v", typeOF(x)) }"#,
        );
        let expected = QueryExpr::comprehension(
            "x",
            QueryExpr::image(
                RelExpr::atom("includes").plus().then(RelExpr::atom("declares")),
                QueryExpr::uri("uri", "urn:a?u"),
            ),
            PropExpr::pred(
                "occurs",
                vec![
                    QueryExpr::uri("uri", "urn:a?v"),
                    QueryExpr::apply("typeOF", vec![QueryExpr::var("x")]),
                ],
            ),
        );
        assert_eq!(q, expected);
    }

    #[test]
    fn zero_projection_is_rejected() {
        let e = parse_query("x.0").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
    }

    #[test]
    fn relation_precedence() {
        let r = parse_relation("inv a+ ; b | c & d").unwrap();
        let expected = RelExpr::atom("a")
            .plus()
            .inv()
            .then(RelExpr::atom("b"))
            .union(RelExpr::atom("c"))
            .intersect(RelExpr::atom("d"));
        assert_eq!(r, expected);
        for r in [
            RelExpr::atom("a").inv().plus(),
            RelExpr::atom("a").then(RelExpr::atom("b").then(RelExpr::atom("c"))),
            RelExpr::atom("a").union(RelExpr::atom("b").minus(RelExpr::atom("c"))),
        ] {
            assert_eq!(parse_relation(&print_relation(&r)).unwrap(), r);
        }
    }

    #[test]
    fn bar_in_comprehension_domain() {
        let q = roundtrip("{x in c | r of x = y}");
        assert!(matches!(q, QueryExpr::Comprehension { ref domain, .. } if **domain == QueryExpr::concept("c")));
        let q = roundtrip("{x in (r | s) of a | p(x)}");
        let QueryExpr::Comprehension { domain, .. } = q else { panic!() };
        assert!(matches!(*domain, QueryExpr::Image(RelExpr::Union(..), _)));
    }

    #[test]
    fn propositions() {
        let f = parse_prop("!p(x) && forall y in c . y = x && q(y)").unwrap();
        let expected = PropExpr::pred("p", vec![QueryExpr::concept("x")]).not().and(PropExpr::forall(
            "y",
            QueryExpr::concept("c"),
            PropExpr::pred("eq", vec![QueryExpr::var("y"), QueryExpr::concept("x")])
                .and(PropExpr::pred("q", vec![QueryExpr::var("y")])),
        ));
        assert_eq!(f, expected);
        assert_eq!(parse_prop(&print_prop(&f)).unwrap(), f);
        let g = parse_prop("(p(x) && q(x)) && (a, b) in c").unwrap();
        assert_eq!(parse_prop(&print_prop(&g)).unwrap(), g);
        let h = parse_prop("f(x) = y").unwrap();
        assert!(matches!(h, PropExpr::Pred { ref name, .. } if name.as_str() == "eq"));
    }

    #[test]
    fn tuples_literals_and_indexed_application() {
        let q = roundtrip(r#"(subobjat[2](obj<{"OMS":"u"}>), (a,), ()).1"#);
        let QueryExpr::Proj(t, 1) = q else { panic!() };
        let QueryExpr::Tuple(items) = *t else { panic!() };
        assert_eq!(
            items[0],
            QueryExpr::apply_indexed("subobjat", 2, vec![QueryExpr::obj("obj", Object::sym("u"))])
        );
        assert_eq!(items[1], QueryExpr::Tuple(vec![QueryExpr::concept("a")]));
        assert_eq!(items[2], QueryExpr::Tuple(vec![]));
    }

    #[test]
    fn sugar_forms() {
        let q = roundtrip("{ (x, y) : x in c, y in r of x }");
        assert_eq!(
            q,
            sugar::desugar_multi_replacement(
                vec![
                    ("x".into(), QueryExpr::concept("c")),
                    ("y".into(), QueryExpr::image(RelExpr::atom("r"), QueryExpr::var("x")))
                ],
                QueryExpr::Tuple(vec![QueryExpr::var("x"), QueryExpr::var("y")])
            )
        );
        roundtrip("select 2, 1 from t as a, b where a = b");
        roundtrip("select 1 from t");
        roundtrip("for x in c let y = f(x) where p(y) return (x, y)");
        let q = roundtrip("box^theory includes . {uri\"u\"}");
        assert_eq!(
            q,
            sugar::desugar_dl_box(
                "theory".into(),
                RelExpr::atom("includes"),
                QueryExpr::apply(sugar::SINGLETON, vec![QueryExpr::uri("uri", "u")])
            )
        );
        roundtrip("union(c, d)");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_query("{x in c |\n  p(x}").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_query("union x in c").is_err());
        assert!(parse_query("a b").is_err());
    }

    #[test]
    fn signature_syntax() {
        let src = "type uri; type obj\nconcept theory : uri\nrelation includes : uri -> uri\n\
                   indexed function subobjat : obj -> obj\nfunction unify : obj -> {(uri, obj, obj)}\n\
                   function c : -> uri\npredicate occurs : uri, obj; predicate t : ()";
        let decls = parse_signature(src).unwrap();
        assert_eq!(decls.len(), 9);
        assert_eq!(parse_signature(&print_signature(&decls)).unwrap(), decls);
        assert!(parse_signature("concept x").is_err());
    }
}
