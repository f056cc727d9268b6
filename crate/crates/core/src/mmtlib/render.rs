//! Presentation markup from notations: MathML-flavoured XML.

use super::library::{DeclarationKind, Fixity, Library, Notation, Style};
use crate::object::Object;
use crate::xml::XmlElement;

const ATOMIC: i32 = i32::MAX;

fn local_name(uri: &str) -> &str {
    uri.rsplit('?').next().unwrap_or(uri)
}

fn mo(t: &str) -> XmlElement {
    XmlElement::new("mo").text(t)
}

fn mi(t: &str) -> XmlElement {
    XmlElement::new("mi").text(t)
}

fn mrow(children: Vec<XmlElement>) -> XmlElement {
    children.into_iter().fold(XmlElement::new("mrow"), XmlElement::child)
}

fn parens(e: XmlElement) -> XmlElement {
    mrow(vec![mo("("), e, mo(")")])
}

enum Piece<'a> {
    Text(&'a str),
    Slot(usize),
}

/// Splits a mixfix template into literal text and `%i` argument slots.
fn template_pieces(t: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = t;
    while let Some(pos) = rest.find('%') {
        let digits = rest[pos + 1..].chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            out.push(Piece::Text(&rest[..pos + 1]));
            rest = &rest[pos + 1..];
            continue;
        }
        if pos > 0 {
            out.push(Piece::Text(&rest[..pos]));
        }
        out.push(Piece::Slot(rest[pos + 1..pos + 1 + digits].parse().unwrap()));
        rest = &rest[pos + 1 + digits..];
    }
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    out
}

struct Renderer<'a> {
    style: &'a Style,
}

impl Renderer<'_> {
    fn notation(&self, o: &Object) -> Option<&Notation> {
        match o {
            Object::Oms(u) => self.style.notations.get(u),
            _ => None,
        }
    }

    fn symbol(&self, u: &str) -> XmlElement {
        match self.style.notations.get(u) {
            Some(n) => mo(&n.text),
            None => mi(local_name(u)),
        }
    }

    /// Renders `o` and reports the precedence of its outermost operator.
    fn render(&self, o: &Object) -> (XmlElement, i32) {
        match o {
            Object::Oms(u) => (self.symbol(u), ATOMIC),
            Object::Omv(x) => (mi(x), ATOMIC),
            Object::Omlit { kind, value } => {
                let tag = if kind == "integer" { "mn" } else { "ms" };
                (XmlElement::new(tag).text(value.as_str()), ATOMIC)
            }
            Object::Oma(head, args) => match self.notation(head) {
                Some(n) if n.fixity == Fixity::Infix && args.len() >= 2 => {
                    let mut kids = Vec::new();
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            kids.push(mo(&n.text));
                        }
                        kids.push(self.operand(a, n.precedence));
                    }
                    (mrow(kids), n.precedence)
                }
                Some(n) if n.fixity == Fixity::Mixfix => match self.mixfix(n, args) {
                    Some(e) => (e, n.precedence),
                    None => (self.prefix(head, args), ATOMIC),
                },
                _ => (self.prefix(head, args), ATOMIC),
            },
            Object::Ombind { binder, ctx, body } => {
                let mut kids = vec![self.render(binder).0];
                for (i, d) in ctx.iter().enumerate() {
                    if i > 0 {
                        kids.push(mo(","));
                    }
                    kids.push(mi(&d.name));
                    if let Some(t) = &d.ty {
                        kids.push(mo(":"));
                        kids.push(self.render(t).0);
                    }
                }
                kids.push(mo("."));
                kids.push(self.render(body).0);
                let prec = self.notation(binder).map_or(0, |n| n.precedence);
                (mrow(kids), prec)
            }
        }
    }

    fn operand(&self, a: &Object, outer: i32) -> XmlElement {
        let (e, p) = self.render(a);
        if p <= outer {
            parens(e)
        } else {
            e
        }
    }

    fn prefix(&self, head: &Object, args: &[Object]) -> XmlElement {
        let (h, hp) = self.render(head);
        let mut kids = vec![if hp == ATOMIC { h } else { parens(h) }, mo("(")];
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                kids.push(mo(","));
            }
            kids.push(self.render(a).0);
        }
        kids.push(mo(")"));
        mrow(kids)
    }

    fn mixfix(&self, n: &Notation, args: &[Object]) -> Option<XmlElement> {
        let pieces = template_pieces(n.template.as_deref()?);
        let mut slots: Vec<usize> = pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Slot(i) => Some(*i),
                _ => None,
            })
            .collect();
        slots.sort_unstable();
        slots.dedup();
        if slots != (1..=args.len()).collect::<Vec<_>>() {
            return None;
        }
        let kids = pieces
            .into_iter()
            .filter_map(|p| match p {
                Piece::Text(t) if t.trim().is_empty() => None,
                Piece::Text(t) => Some(mo(t.trim())),
                Piece::Slot(i) => Some(self.operand(&args[i - 1], n.precedence)),
            })
            .collect();
        Some(mrow(kids))
    }
}

fn math(e: XmlElement) -> XmlElement {
    XmlElement::new("math").child(e)
}

/// Renders an object with the notations of `style`.
pub fn render_object(lib: &Library, o: &Object, style: &str) -> Result<XmlElement, String> {
    let style = lib.style(style).ok_or_else(|| format!("{style} is not a style"))?;
    Ok(math(Renderer { style }.render(o).0))
}

/// Renders a declaration as `name : type = definiens`, containers as the
/// list of their parts.
pub fn render_declaration(lib: &Library, uri: &str, style: &str) -> Result<XmlElement, String> {
    let st = lib.style(style).ok_or_else(|| format!("{style} is not a style"))?;
    let r = Renderer { style: st };
    let constant = |c: &str| -> XmlElement {
        let c = lib.constant(c).expect("declared constant");
        let mut kids = vec![mi(local_name(&c.uri))];
        if let Some(t) = &c.ty {
            kids.push(mo(":"));
            kids.push(r.render(t).0);
        }
        if let Some(d) = &c.def {
            kids.push(mo("="));
            kids.push(r.render(d).0);
        }
        XmlElement::new("constant").attr("uri", &c.uri).child(math(mrow(kids)))
    };
    match lib.kind(uri) {
        Some(DeclarationKind::Constant) => Ok(constant(uri)),
        Some(DeclarationKind::Theory) => {
            let t = lib.theory(uri).unwrap();
            let mut e = XmlElement::new("theory").attr("uri", uri);
            for i in &t.includes {
                e.push(XmlElement::new("include").attr("from", i));
            }
            for c in &t.constants {
                e.push(constant(c));
            }
            Ok(e)
        }
        Some(DeclarationKind::View) => {
            let v = lib.view(uri).unwrap();
            let mut e = XmlElement::new("view")
                .attr("uri", uri)
                .attr("from", &v.domain)
                .attr("to", &v.codomain);
            for (c, o) in &v.assignments {
                e.push(
                    XmlElement::new("assignment")
                        .attr("name", c)
                        .child(math(mrow(vec![mi(local_name(c)), mo("↦"), r.render(o).0]))),
                );
            }
            Ok(e)
        }
        Some(DeclarationKind::Style) => Err(format!("{uri} is a style and has no rendering")),
        None => Err(format!("{uri} is not declared")),
    }
}
