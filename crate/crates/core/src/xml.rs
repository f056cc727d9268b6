//! A minimal owned XML element tree, parsed with `quick-xml`.

use std::fmt::{self, Write as _};

use quick_xml::events::Event;
use quick_xml::Reader;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum XmlNode {
    Element(XmlElement),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XmlElement {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<XmlNode>,
}

#[derive(Debug, thiserror::Error)]
#[error("XML error at byte {position}: {message}")]
pub struct XmlError {
    pub position: u64,
    pub message: String,
}

impl XmlElement {
    pub fn new(name: impl Into<String>) -> Self {
        XmlElement {
            name: name.into(),
            attrs: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.push((key.into(), value.into()));
        self
    }

    pub fn child(mut self, e: XmlElement) -> Self {
        self.children.push(XmlNode::Element(e));
        self
    }

    pub fn text(mut self, t: impl Into<String>) -> Self {
        self.children.push(XmlNode::Text(t.into()));
        self
    }

    pub fn push(&mut self, e: XmlElement) {
        self.children.push(XmlNode::Element(e));
    }

    pub fn get_attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Child elements, skipping text nodes.
    pub fn elements(&self) -> impl Iterator<Item = &XmlElement> {
        self.children.iter().filter_map(|c| match c {
            XmlNode::Element(e) => Some(e),
            XmlNode::Text(_) => None,
        })
    }

    /// Concatenated text content of direct text children.
    pub fn text_content(&self) -> String {
        self.children
            .iter()
            .filter_map(|c| match c {
                XmlNode::Text(t) => Some(t.as_str()),
                XmlNode::Element(_) => None,
            })
            .collect()
    }

    pub fn parse(input: &str) -> Result<XmlElement, XmlError> {
        let mut reader = Reader::from_str(input);
        let mut stack: Vec<XmlElement> = Vec::new();
        let mut root: Option<XmlElement> = None;
        let err = |reader: &Reader<&[u8]>, message: String| XmlError {
            position: reader.buffer_position(),
            message,
        };
        loop {
            let event = reader
                .read_event()
                .map_err(|e| err(&reader, e.to_string()))?;
            match event {
                Event::Start(start) | Event::Empty(start) if root.is_some() => {
                    let _ = start;
                    return Err(err(&reader, "content after the root element".into()));
                }
                Event::Start(start) => {
                    stack.push(element_from(&reader, &start)?);
                }
                Event::Empty(start) => {
                    let e = element_from(&reader, &start)?;
                    match stack.last_mut() {
                        Some(parent) => parent.push(e),
                        None => root = Some(e),
                    }
                }
                Event::End(_) => {
                    let e = stack
                        .pop()
                        .ok_or_else(|| err(&reader, "unbalanced end tag".into()))?;
                    match stack.last_mut() {
                        Some(parent) => parent.push(e),
                        None => root = Some(e),
                    }
                }
                Event::Text(t) => {
                    let s = t
                        .unescape()
                        .map_err(|e| err(&reader, e.to_string()))?
                        .into_owned();
                    if let Some(parent) = stack.last_mut() {
                        if !s.trim().is_empty() {
                            parent.children.push(XmlNode::Text(s));
                        }
                    } else if !s.trim().is_empty() {
                        return Err(err(&reader, "text outside the root element".into()));
                    }
                }
                Event::CData(t) => {
                    if let Some(parent) = stack.last_mut() {
                        parent
                            .children
                            .push(XmlNode::Text(String::from_utf8_lossy(&t).into_owned()));
                    }
                }
                Event::Eof => break,
                _ => {}
            }
        }
        if !stack.is_empty() {
            return Err(XmlError {
                position: input.len() as u64,
                message: format!("unclosed element <{}>", stack.last().unwrap().name),
            });
        }
        root.ok_or(XmlError {
            position: 0,
            message: "no root element".into(),
        })
    }

    fn write_to(&self, out: &mut String) {
        let _ = write!(out, "<{}", self.name);
        for (k, v) in &self.attrs {
            let _ = write!(out, " {}=\"{}\"", k, quick_xml::escape::escape(v.as_str()));
        }
        if self.children.is_empty() {
            out.push_str("/>");
            return;
        }
        out.push('>');
        for c in &self.children {
            match c {
                XmlNode::Element(e) => e.write_to(out),
                XmlNode::Text(t) => out.push_str(&quick_xml::escape::escape(t.as_str())),
            }
        }
        let _ = write!(out, "</{}>", self.name);
    }
}

fn element_from(
    reader: &Reader<&[u8]>,
    start: &quick_xml::events::BytesStart<'_>,
) -> Result<XmlElement, XmlError> {
    let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
    let mut e = XmlElement::new(name);
    for a in start.attributes() {
        let a = a.map_err(|e| XmlError {
            position: reader.buffer_position(),
            message: e.to_string(),
        })?;
        let key = String::from_utf8_lossy(a.key.as_ref()).into_owned();
        let value = a
            .unescape_value()
            .map_err(|e| XmlError {
                position: reader.buffer_position(),
                message: e.to_string(),
            })?
            .into_owned();
        e.attrs.push((key, value));
    }
    Ok(e)
}

impl fmt::Display for XmlElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write_to(&mut s);
        f.write_str(&s)
    }
}
