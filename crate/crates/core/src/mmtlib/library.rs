use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::object::Object;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("DuplicateUri: {0} is declared more than once")]
    DuplicateUri(String),
    #[error("invalid library: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub uri: String,
    pub includes: Vec<String>,
    /// Name of the type system used for `typeof` relative to this theory.
    pub typesystem: Option<String>,
    /// URIs of the constants declared directly in this theory.
    pub constants: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constant {
    pub uri: String,
    pub theory: String,
    pub ty: Option<Object>,
    pub def: Option<Object>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct View {
    pub uri: String,
    pub domain: String,
    pub codomain: String,
    pub assignments: BTreeMap<String, Object>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixity {
    Prefix,
    Infix,
    Mixfix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notation {
    pub fixity: Fixity,
    /// Mixfix template; `%1`, `%2`, … are argument slots.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default)]
    pub precedence: i32,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Style {
    pub uri: String,
    pub notations: BTreeMap<String, Notation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclarationKind {
    Theory,
    Constant,
    View,
    Style,
}

/// A set of declarations indexed by URI.
#[derive(Clone, Debug, Default)]
pub struct Library {
    theories: BTreeMap<String, Theory>,
    constants: BTreeMap<String, Constant>,
    views: BTreeMap<String, View>,
    styles: BTreeMap<String, Style>,
    warnings: Vec<String>,
}

// wire format

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct WireLibrary {
    #[serde(default)]
    theories: Vec<WireTheory>,
    #[serde(default)]
    views: Vec<WireView>,
    #[serde(default)]
    styles: Vec<WireStyle>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireTheory {
    uri: String,
    #[serde(default)]
    includes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    typesystem: Option<String>,
    #[serde(default)]
    constants: Vec<WireConstant>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireConstant {
    uri: String,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    ty: Option<Object>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    def: Option<Object>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireView {
    uri: String,
    domain: String,
    codomain: String,
    #[serde(default)]
    assignments: BTreeMap<String, Object>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireStyle {
    uri: String,
    #[serde(default)]
    notations: BTreeMap<String, Notation>,
}

/// Constant names without a `?` are local to their theory.
fn qualify(theory: &str, name: &str) -> String {
    if name.contains('?') {
        name.to_owned()
    } else {
        format!("{theory}?{name}")
    }
}

impl Library {
    pub fn empty() -> Self {
        Library::default()
    }

    pub fn from_json_str(src: &str) -> Result<Library, LoadError> {
        Library::parse(src, "<input>")
    }

    fn parse(src: &str, origin: &str) -> Result<Library, LoadError> {
        if src.trim().is_empty() {
            return Ok(Library::empty());
        }
        let wire: WireLibrary = serde_json::from_str(src).map_err(|e| LoadError::Parse {
            origin: origin.to_owned(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Library::from_wire(wire)
    }

    /// Loads a library file, or every `*.json` file of a directory merged
    /// in file name order.
    pub fn load(path: &Path) -> Result<Library, LoadError> {
        let io = |source| LoadError::Io {
            path: path.display().to_string(),
            source,
        };
        if path.is_dir() {
            let mut files: Vec<_> = std::fs::read_dir(path)
                .map_err(io)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            let libs = files
                .iter()
                .map(|f| Library::load(f))
                .collect::<Result<Vec<_>, _>>()?;
            return Library::merge(libs);
        }
        let src = std::fs::read_to_string(path).map_err(io)?;
        Library::parse(&src, &path.display().to_string())
    }

    fn from_wire(wire: WireLibrary) -> Result<Library, LoadError> {
        let mut lib = Library::default();
        for t in wire.theories {
            let mut constants = Vec::with_capacity(t.constants.len());
            for c in t.constants {
                let uri = qualify(&t.uri, &c.uri);
                constants.push(uri.clone());
                lib.add_constant(Constant {
                    uri,
                    theory: t.uri.clone(),
                    ty: c.ty,
                    def: c.def,
                })?;
            }
            lib.add_theory(Theory {
                uri: t.uri,
                includes: t.includes,
                typesystem: t.typesystem,
                constants,
            })?;
        }
        for v in wire.views {
            lib.add_view(View {
                uri: v.uri,
                domain: v.domain,
                codomain: v.codomain,
                assignments: v.assignments,
            })?;
        }
        for s in wire.styles {
            lib.add_style(Style {
                uri: s.uri,
                notations: s.notations,
            })?;
        }
        lib.collect_warnings();
        Ok(lib)
    }

    fn claim(&self, uri: &str) -> Result<(), LoadError> {
        if uri.is_empty() {
            return Err(LoadError::Invalid("empty URI".into()));
        }
        if self.kind(uri).is_some() {
            return Err(LoadError::DuplicateUri(uri.to_owned()));
        }
        Ok(())
    }

    pub fn add_theory(&mut self, t: Theory) -> Result<(), LoadError> {
        self.claim(&t.uri)?;
        self.theories.insert(t.uri.clone(), t);
        Ok(())
    }

    pub fn add_constant(&mut self, c: Constant) -> Result<(), LoadError> {
        self.claim(&c.uri)?;
        self.constants.insert(c.uri.clone(), c);
        Ok(())
    }

    pub fn add_view(&mut self, v: View) -> Result<(), LoadError> {
        self.claim(&v.uri)?;
        self.views.insert(v.uri.clone(), v);
        Ok(())
    }

    pub fn add_style(&mut self, s: Style) -> Result<(), LoadError> {
        self.claim(&s.uri)?;
        self.styles.insert(s.uri.clone(), s);
        Ok(())
    }

    /// Registers libraries side by side; a URI declared in two of them is
    /// an error.
    pub fn merge(libs: impl IntoIterator<Item = Library>) -> Result<Library, LoadError> {
        let mut out = Library::default();
        for lib in libs {
            for (_, t) in lib.theories {
                out.add_theory(t)?;
            }
            for (_, c) in lib.constants {
                out.add_constant(c)?;
            }
            for (_, v) in lib.views {
                out.add_view(v)?;
            }
            for (_, s) in lib.styles {
                out.add_style(s)?;
            }
        }
        out.collect_warnings();
        Ok(out)
    }

    fn collect_warnings(&mut self) {
        let mut w = Vec::new();
        for t in self.theories.values() {
            for i in &t.includes {
                if !self.theories.contains_key(i) {
                    w.push(format!("theory {} includes undeclared theory {i}", t.uri));
                }
            }
        }
        for v in self.views.values() {
            for (role, t) in [("domain", &v.domain), ("codomain", &v.codomain)] {
                if !self.theories.contains_key(t) {
                    w.push(format!("view {} has undeclared {role} {t}", v.uri));
                }
            }
        }
        self.warnings = w;
    }

    /// Dangling references found while loading.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn kind(&self, uri: &str) -> Option<DeclarationKind> {
        if self.theories.contains_key(uri) {
            Some(DeclarationKind::Theory)
        } else if self.constants.contains_key(uri) {
            Some(DeclarationKind::Constant)
        } else if self.views.contains_key(uri) {
            Some(DeclarationKind::View)
        } else if self.styles.contains_key(uri) {
            Some(DeclarationKind::Style)
        } else {
            None
        }
    }

    pub fn theory(&self, uri: &str) -> Option<&Theory> {
        self.theories.get(uri)
    }

    pub fn constant(&self, uri: &str) -> Option<&Constant> {
        self.constants.get(uri)
    }

    pub fn view(&self, uri: &str) -> Option<&View> {
        self.views.get(uri)
    }

    pub fn style(&self, uri: &str) -> Option<&Style> {
        self.styles.get(uri)
    }

    pub fn theories(&self) -> impl Iterator<Item = &Theory> {
        self.theories.values()
    }

    pub fn constants(&self) -> impl Iterator<Item = &Constant> {
        self.constants.values()
    }

    pub fn views(&self) -> impl Iterator<Item = &View> {
        self.views.values()
    }

    pub fn styles(&self) -> impl Iterator<Item = &Style> {
        self.styles.values()
    }

    /// Every declared URI plus the targets of dangling references, which
    /// still occur in extracted relation facts.
    pub fn uri_universe(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .theories
            .keys()
            .chain(self.constants.keys())
            .chain(self.views.keys())
            .chain(self.styles.keys())
            .cloned()
            .collect();
        for t in self.theories.values() {
            out.extend(t.includes.iter().cloned());
        }
        for v in self.views.values() {
            out.insert(v.domain.clone());
            out.insert(v.codomain.clone());
        }
        out
    }

    /// SHA-256 of the canonical serialization; keys index caches.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_vec(&self.to_wire()).expect("library serializes");
        hex::encode(Sha256::digest(json))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("library serializes")
    }

    fn to_wire(&self) -> WireLibrary {
        WireLibrary {
            theories: self
                .theories
                .values()
                .map(|t| WireTheory {
                    uri: t.uri.clone(),
                    includes: t.includes.clone(),
                    typesystem: t.typesystem.clone(),
                    constants: t
                        .constants
                        .iter()
                        .map(|c| {
                            let c = &self.constants[c];
                            WireConstant {
                                uri: c.uri.clone(),
                                ty: c.ty.clone(),
                                def: c.def.clone(),
                            }
                        })
                        .collect(),
                })
                .collect(),
            views: self
                .views
                .values()
                .map(|v| WireView {
                    uri: v.uri.clone(),
                    domain: v.domain.clone(),
                    codomain: v.codomain.clone(),
                    assignments: v.assignments.clone(),
                })
                .collect(),
            styles: self
                .styles
                .values()
                .map(|s| WireStyle {
                    uri: s.uri.clone(),
                    notations: s.notations.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for DeclarationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeclarationKind::Theory => "theory",
            DeclarationKind::Constant => "constant",
            DeclarationKind::View => "view",
            DeclarationKind::Style => "style",
        })
    }
}
