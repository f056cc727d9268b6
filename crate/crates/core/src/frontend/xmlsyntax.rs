//! The XML vocabulary for queries, objects, values and signatures.
//!
//! ```text
//! query  <concept name/> <var name/> <literal type value/> <literal type>OBJ</literal>
//!        <apply fun index?>Q*</apply> <tuple>Q*</tuple> <proj i>Q</proj>
//!        <image>R Q</image> <bigunion var>Q Q</bigunion> <comprehension var>Q F</comprehension>
//! rel    <rel name/> <rel op="inv|plus">R</rel> <rel op="compose|union|intersect|diff">R R</rel>
//! prop   <prop op="pred" name>Q*</prop> <prop op="not">F</prop> <prop op="and">F F</prop>
//!        <prop op="forall" var>Q F</prop>
//! object <OMS name/> <OMV name/> <OMA>O O+</OMA> <OMLIT kind value/>
//!        <OMBIND>O <OMBVAR><OMV name>O?</OMV>*</OMBVAR> O</OMBIND>
//! value  <uri>text</uri> <obj>O</obj> <xml>element</xml> <tuple>V*</tuple> <set>V*</set>
//! ```
//!
//! Structural errors carry line and column 0 since the element tree keeps
//! no positions.

use super::lexer::{ParseError, Pos};
use super::text::{parse_type, parse_type_list, print_type, print_type_list};
use crate::kernel::{
    Literal, LiteralValue, PropExpr, QueryExpr, RelExpr, Signature, SignatureDecl, Value, VarName,
};
use crate::object::{Object, VarDecl};
use crate::xml::XmlElement;

type PResult<T> = Result<T, ParseError>;

fn err<T>(msg: impl Into<String>) -> PResult<T> {
    Err(ParseError::new(Pos::default(), msg))
}

/// Parses XML text into an element, translating byte offsets to positions.
pub fn parse_element(src: &str) -> PResult<XmlElement> {
    XmlElement::parse(src).map_err(|e| {
        let upto = &src[..(e.position as usize).min(src.len())];
        let line = upto.matches('\n').count() + 1;
        let column = upto.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            line,
            column,
            message: e.message,
        }
    })
}

fn attr<'a>(e: &'a XmlElement, key: &str) -> PResult<&'a str> {
    match e.get_attr(key) {
        Some(v) if !v.is_empty() => Ok(v),
        _ => err(format!("<{}> needs a non-empty `{key}` attribute", e.name)),
    }
}

fn children(e: &XmlElement) -> Vec<&XmlElement> {
    e.elements().collect()
}

fn exactly<const N: usize>(e: &XmlElement) -> PResult<[&XmlElement; N]> {
    let kids = children(e);
    let n = kids.len();
    kids.try_into()
        .or_else(|_| err(format!("<{}> needs exactly {N} child elements, found {n}", e.name)))
}

fn no_children(e: &XmlElement) -> PResult<()> {
    exactly::<0>(e).map(|_| ())
}

fn positive(e: &XmlElement, key: &str) -> PResult<usize> {
    let v = attr(e, key)?;
    match v.parse::<usize>() {
        Ok(0) => err(format!("`{key}` on <{}> is 1-based", e.name)),
        Ok(n) => Ok(n),
        Err(_) => err(format!("`{key}` on <{}> must be a positive integer, not {v:?}", e.name)),
    }
}

// ---- objects ----

pub fn object_to_xml(o: &Object) -> XmlElement {
    match o {
        Object::Oms(u) => XmlElement::new("OMS").attr("name", u),
        Object::Omv(x) => XmlElement::new("OMV").attr("name", x),
        Object::Omlit { kind, value } => XmlElement::new("OMLIT").attr("kind", kind).attr("value", value),
        Object::Oma(h, args) => args
            .iter()
            .fold(XmlElement::new("OMA").child(object_to_xml(h)), |e, a| e.child(object_to_xml(a))),
        Object::Ombind { binder, ctx, body } => {
            let vars = ctx.iter().fold(XmlElement::new("OMBVAR"), |e, d| {
                let v = XmlElement::new("OMV").attr("name", &d.name);
                e.child(match &d.ty {
                    Some(t) => v.child(object_to_xml(t)),
                    None => v,
                })
            });
            XmlElement::new("OMBIND")
                .child(object_to_xml(binder))
                .child(vars)
                .child(object_to_xml(body))
        }
    }
}

pub fn object_from_xml(e: &XmlElement) -> PResult<Object> {
    match e.name.as_str() {
        "OMS" => {
            no_children(e)?;
            Ok(Object::sym(attr(e, "name")?))
        }
        "OMV" => {
            no_children(e)?;
            Ok(Object::var(attr(e, "name")?))
        }
        "OMLIT" => {
            no_children(e)?;
            let kind = attr(e, "kind")?;
            let value = e.get_attr("value").unwrap_or("");
            let json = serde_json::json!({"OMLIT": {"kind": kind, "value": value}});
            serde_json::from_value(json).or_else(|x| err(x.to_string()))
        }
        "OMA" => {
            let kids = children(e);
            if kids.len() < 2 {
                return err("<OMA> needs a head and at least one argument");
            }
            let head = object_from_xml(kids[0])?;
            let args = kids[1..].iter().map(|k| object_from_xml(k)).collect::<PResult<_>>()?;
            Ok(Object::app(head, args))
        }
        "OMBIND" => {
            let [binder, vars, body] = exactly(e)?;
            if vars.name != "OMBVAR" {
                return err("the second child of <OMBIND> must be <OMBVAR>");
            }
            let ctx = vars
                .elements()
                .map(|v| {
                    if v.name != "OMV" {
                        return err("<OMBVAR> contains only <OMV> elements");
                    }
                    let ty = match children(v).as_slice() {
                        [] => None,
                        [t] => Some(object_from_xml(t)?),
                        _ => return err("a bound <OMV> has at most one type"),
                    };
                    Ok(VarDecl::new(attr(v, "name")?, ty))
                })
                .collect::<PResult<_>>()?;
            Ok(Object::bind(object_from_xml(binder)?, ctx, object_from_xml(body)?))
        }
        other => err(format!("unknown object element <{other}>")),
    }
}

// ---- relations ----

pub fn rel_to_xml(r: &RelExpr) -> XmlElement {
    let op = |name: &str, parts: &[&RelExpr]| {
        parts
            .iter()
            .fold(XmlElement::new("rel").attr("op", name), |e, p| e.child(rel_to_xml(p)))
    };
    match r {
        RelExpr::Atomic(n) => XmlElement::new("rel").attr("name", n.as_str()),
        RelExpr::Inverse(a) => op("inv", &[a]),
        RelExpr::TransClosure(a) => op("plus", &[a]),
        RelExpr::Compose(a, b) => op("compose", &[a, b]),
        RelExpr::Union(a, b) => op("union", &[a, b]),
        RelExpr::Intersect(a, b) => op("intersect", &[a, b]),
        RelExpr::Diff(a, b) => op("diff", &[a, b]),
    }
}

pub fn rel_from_xml(e: &XmlElement) -> PResult<RelExpr> {
    if e.name != "rel" {
        return err(format!("expected a <rel> element, found <{}>", e.name));
    }
    let Some(op) = e.get_attr("op") else {
        no_children(e)?;
        return Ok(RelExpr::atom(attr(e, "name")?));
    };
    let unary = |f: fn(RelExpr) -> RelExpr| -> PResult<RelExpr> {
        let [a] = exactly(e)?;
        Ok(f(rel_from_xml(a)?))
    };
    let binary = |f: fn(RelExpr, RelExpr) -> RelExpr| -> PResult<RelExpr> {
        let [a, b] = exactly(e)?;
        Ok(f(rel_from_xml(a)?, rel_from_xml(b)?))
    };
    match op {
        "inv" => unary(RelExpr::inv),
        "plus" => unary(RelExpr::plus),
        "compose" => binary(RelExpr::then),
        "union" => binary(RelExpr::union),
        "intersect" => binary(RelExpr::intersect),
        "diff" => binary(RelExpr::minus),
        other => err(format!("unknown relation operator {other:?}")),
    }
}

// ---- propositions ----

pub fn prop_to_xml(f: &PropExpr) -> XmlElement {
    let prop = |op: &str| XmlElement::new("prop").attr("op", op);
    match f {
        PropExpr::Pred { name, args } => args
            .iter()
            .fold(prop("pred").attr("name", name.as_str()), |e, a| e.child(query_to_xml(a))),
        PropExpr::Not(g) => prop("not").child(prop_to_xml(g)),
        PropExpr::And(a, b) => prop("and").child(prop_to_xml(a)).child(prop_to_xml(b)),
        PropExpr::ForallIn { var, domain, body } => prop("forall")
            .attr("var", var.as_str())
            .child(query_to_xml(domain))
            .child(prop_to_xml(body)),
    }
}

pub fn prop_from_xml(e: &XmlElement) -> PResult<PropExpr> {
    if e.name != "prop" {
        return err(format!("expected a <prop> element, found <{}>", e.name));
    }
    match attr(e, "op")? {
        "pred" => {
            let args = e.elements().map(query_from_xml).collect::<PResult<_>>()?;
            Ok(PropExpr::pred(attr(e, "name")?, args))
        }
        "not" => {
            let [g] = exactly(e)?;
            Ok(prop_from_xml(g)?.not())
        }
        "and" => {
            let [a, b] = exactly(e)?;
            Ok(prop_from_xml(a)?.and(prop_from_xml(b)?))
        }
        "forall" => {
            let [d, b] = exactly(e)?;
            Ok(PropExpr::forall(attr(e, "var")?, query_from_xml(d)?, prop_from_xml(b)?))
        }
        other => err(format!("unknown proposition operator {other:?}")),
    }
}

// ---- queries ----

pub fn query_to_xml(q: &QueryExpr) -> XmlElement {
    match q {
        QueryExpr::Concept(c) => XmlElement::new("concept").attr("name", c.as_str()),
        QueryExpr::Var(x) => XmlElement::new("var").attr("name", x.as_str()),
        QueryExpr::Literal(lit) => {
            let e = XmlElement::new("literal").attr("type", lit.base.as_str());
            match &lit.value {
                LiteralValue::Str(s) => e.attr("value", s),
                LiteralValue::Obj(o) => e.child(object_to_xml(o)),
            }
        }
        QueryExpr::Apply { fun, index, args } => {
            let mut e = XmlElement::new("apply").attr("fun", fun.as_str());
            if let Some(i) = index {
                e = e.attr("index", i.to_string());
            }
            args.iter().fold(e, |e, a| e.child(query_to_xml(a)))
        }
        QueryExpr::Tuple(items) => items
            .iter()
            .fold(XmlElement::new("tuple"), |e, a| e.child(query_to_xml(a))),
        QueryExpr::Proj(inner, i) => XmlElement::new("proj")
            .attr("i", i.to_string())
            .child(query_to_xml(inner)),
        QueryExpr::Image(r, arg) => XmlElement::new("image")
            .child(rel_to_xml(r))
            .child(query_to_xml(arg)),
        QueryExpr::BigUnion { var, domain, body } => XmlElement::new("bigunion")
            .attr("var", var.as_str())
            .child(query_to_xml(domain))
            .child(query_to_xml(body)),
        QueryExpr::Comprehension {
            var,
            domain,
            filter,
        } => XmlElement::new("comprehension")
            .attr("var", var.as_str())
            .child(query_to_xml(domain))
            .child(prop_to_xml(filter)),
    }
}

pub fn query_from_xml(e: &XmlElement) -> PResult<QueryExpr> {
    match e.name.as_str() {
        "concept" => {
            no_children(e)?;
            Ok(QueryExpr::concept(attr(e, "name")?))
        }
        "var" => {
            no_children(e)?;
            Ok(QueryExpr::var(attr(e, "name")?))
        }
        "literal" => {
            let base = attr(e, "type")?.into();
            let value = match (children(e).as_slice(), e.get_attr("value")) {
                ([], Some(v)) => LiteralValue::Str(v.to_owned()),
                ([o], None) => LiteralValue::Obj(object_from_xml(o)?),
                _ => return err("<literal> has either a `value` attribute or one object child"),
            };
            Ok(QueryExpr::Literal(Literal { base, value }))
        }
        "apply" => {
            let fun = attr(e, "fun")?;
            let args = e.elements().map(query_from_xml).collect::<PResult<_>>()?;
            match e.get_attr("index") {
                None => Ok(QueryExpr::apply(fun, args)),
                Some(i) => match i.parse::<u32>() {
                    Ok(i) => Ok(QueryExpr::apply_indexed(fun, i, args)),
                    Err(_) => err(format!("index {i:?} is not a natural number")),
                },
            }
        }
        "tuple" => Ok(QueryExpr::Tuple(
            e.elements().map(query_from_xml).collect::<PResult<_>>()?,
        )),
        "proj" => {
            let [inner] = exactly(e)?;
            Ok(query_from_xml(inner)?.proj(positive(e, "i")?))
        }
        "image" => {
            let [r, arg] = exactly(e)?;
            Ok(QueryExpr::image(rel_from_xml(r)?, query_from_xml(arg)?))
        }
        "bigunion" => {
            let [d, b] = exactly(e)?;
            Ok(QueryExpr::big_union(
                VarName::new(attr(e, "var")?),
                query_from_xml(d)?,
                query_from_xml(b)?,
            ))
        }
        "comprehension" => {
            let [d, f] = exactly(e)?;
            Ok(QueryExpr::comprehension(
                VarName::new(attr(e, "var")?),
                query_from_xml(d)?,
                prop_from_xml(f)?,
            ))
        }
        other => err(format!("unknown query element <{other}>")),
    }
}

pub fn parse_query_xml(src: &str) -> PResult<QueryExpr> {
    query_from_xml(&parse_element(src)?)
}

// ---- values ----

pub fn value_to_xml(v: &Value) -> XmlElement {
    match v {
        Value::Uri(u) => XmlElement::new("uri").text(u),
        Value::Obj(o) => XmlElement::new("obj").child(object_to_xml(o)),
        Value::Xml(x) => XmlElement::new("xml").child(x.clone()),
        Value::Tuple(vs) => vs
            .iter()
            .fold(XmlElement::new("tuple"), |e, v| e.child(value_to_xml(v))),
        Value::Set(vs) => vs
            .iter()
            .fold(XmlElement::new("set"), |e, v| e.child(value_to_xml(v))),
    }
}

pub fn value_from_xml(e: &XmlElement) -> PResult<Value> {
    match e.name.as_str() {
        "uri" => Ok(Value::Uri(e.text_content())),
        "obj" => {
            let [o] = exactly(e)?;
            Ok(Value::Obj(object_from_xml(o)?))
        }
        "xml" => {
            let [x] = exactly(e)?;
            Ok(Value::Xml(x.clone()))
        }
        "tuple" => Ok(Value::Tuple(e.elements().map(value_from_xml).collect::<PResult<_>>()?)),
        "set" => Ok(Value::set(e.elements().map(value_from_xml).collect::<PResult<Vec<_>>>()?)),
        other => err(format!("unknown value element <{other}>")),
    }
}

// ---- signatures ----

pub fn decl_to_xml(d: &SignatureDecl) -> XmlElement {
    match d {
        SignatureDecl::BaseType(a) => XmlElement::new("type").attr("name", a.as_str()),
        SignatureDecl::Concept { name, of } => XmlElement::new("concept")
            .attr("name", name.as_str())
            .attr("of", of.as_str()),
        SignatureDecl::Relation { name, from, to } => XmlElement::new("relation")
            .attr("name", name.as_str())
            .attr("from", from.as_str())
            .attr("to", to.as_str()),
        SignatureDecl::Function {
            name,
            indexed,
            args,
            result,
        } => {
            let mut e = XmlElement::new("function").attr("name", name.as_str());
            if *indexed {
                e = e.attr("indexed", "true");
            }
            e.attr("args", print_type_list(args).trim_start_matches("()"))
                .attr("result", print_type(result))
        }
        SignatureDecl::Predicate { name, args } => XmlElement::new("predicate")
            .attr("name", name.as_str())
            .attr("args", print_type_list(args).trim_start_matches("()")),
    }
}

pub fn decl_from_xml(e: &XmlElement) -> PResult<SignatureDecl> {
    no_children(e)?;
    let types = |key: &str| parse_type_list(e.get_attr(key).unwrap_or(""));
    Ok(match e.name.as_str() {
        "type" => SignatureDecl::BaseType(attr(e, "name")?.into()),
        "concept" => SignatureDecl::Concept {
            name: attr(e, "name")?.into(),
            of: attr(e, "of")?.into(),
        },
        "relation" => SignatureDecl::Relation {
            name: attr(e, "name")?.into(),
            from: attr(e, "from")?.into(),
            to: attr(e, "to")?.into(),
        },
        "function" => SignatureDecl::Function {
            name: attr(e, "name")?.into(),
            indexed: match e.get_attr("indexed") {
                None | Some("false") => false,
                Some("true") => true,
                Some(other) => return err(format!("`indexed` must be true or false, not {other:?}")),
            },
            args: types("args")?,
            result: parse_type(attr(e, "result")?)?,
        },
        "predicate" => SignatureDecl::Predicate {
            name: attr(e, "name")?.into(),
            args: types("args")?,
        },
        other => return err(format!("unknown declaration element <{other}>")),
    })
}

pub fn decls_to_xml(decls: &[SignatureDecl]) -> XmlElement {
    decls
        .iter()
        .fold(XmlElement::new("signature"), |e, d| e.child(decl_to_xml(d)))
}

pub fn decls_from_xml(e: &XmlElement) -> PResult<Vec<SignatureDecl>> {
    if e.name != "signature" {
        return err(format!("expected <signature>, found <{}>", e.name));
    }
    e.elements().map(decl_from_xml).collect()
}

/// The signature as served to clients, flagging the predefined symbols.
pub fn signature_to_xml(sig: &Signature) -> XmlElement {
    let mut e = decls_to_xml(sig.decls());
    if sig.has_predefined() {
        e.attrs.push(("predefined".into(), "singleton union eq in".into()));
    }
    e
}
