use std::borrow::Borrow;
use std::fmt;

macro_rules! identifier {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            /// Panics on the empty string.
            pub fn new(s: impl Into<String>) -> Self {
                let s = s.into();
                assert!(!s.is_empty(), concat!(stringify!($name), " must be non-empty"));
                $name(s)
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name::new(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

identifier!(
    /// Name of a base type such as `uri` or `obj`.
    BaseTypeName
);
identifier!(ConceptName);
identifier!(RelationName);
identifier!(FunName);
identifier!(PredName);
identifier!(VarName);
