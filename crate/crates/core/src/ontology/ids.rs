use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;
use crate::lang::LanguageCode;

/// Id tokens: ASCII letters, digits, `_` and `-`, not starting with `-`.
pub fn is_token(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn invalid(kind: &'static str, value: &str, reason: &'static str) -> CoreError {
    CoreError::InvalidId {
        kind,
        value: value.to_string(),
        reason,
    }
}

/// `sector:local` identifier of a concept.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptId(String);

impl ConceptId {
    pub fn new(sector: &str, local: &str) -> Result<Self, CoreError> {
        format!("{sector}:{local}").parse()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn sector(&self) -> &str {
        self.0.split_once(':').map(|(s, _)| s).unwrap_or_default()
    }

    pub fn local(&self) -> &str {
        self.0.split_once(':').map(|(_, l)| l).unwrap_or_default()
    }
}

impl FromStr for ConceptId {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (sector, local) = s
            .split_once(':')
            .ok_or_else(|| invalid("concept", s, "expected sector:local"))?;
        if !is_token(sector) || !is_token(local) {
            return Err(invalid("concept", s, "sector and local parts must be id tokens"));
        }
        Ok(ConceptId(s.to_string()))
    }
}

/// `lang:sector:local` identifier of an expression.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpressionId(String);

impl ExpressionId {
    pub fn new(language: LanguageCode, sector: &str, local: &str) -> Result<Self, CoreError> {
        format!("{language}:{sector}:{local}").parse()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn parts(&self) -> (&str, &str, &str) {
        let mut it = self.0.splitn(3, ':');
        let lang = it.next().unwrap_or_default();
        let sector = it.next().unwrap_or_default();
        let local = it.next().unwrap_or_default();
        (lang, sector, local)
    }

    pub fn language(&self) -> LanguageCode {
        // validated at construction
        LanguageCode::new(self.parts().0).unwrap_or_default()
    }

    pub fn sector(&self) -> &str {
        self.parts().1
    }

    pub fn local(&self) -> &str {
        self.parts().2
    }
}

impl FromStr for ExpressionId {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut it = s.splitn(3, ':');
        let (Some(lang), Some(sector), Some(local)) = (it.next(), it.next(), it.next()) else {
            return Err(invalid("expression", s, "expected lang:sector:local"));
        };
        LanguageCode::new(lang).map_err(|_| invalid("expression", s, "bad language prefix"))?;
        if !is_token(sector) || !is_token(local) {
            return Err(invalid(
                "expression",
                s,
                "sector and local parts must be id tokens",
            ));
        }
        Ok(ExpressionId(s.to_string()))
    }
}

macro_rules! string_id_impls {
    ($ty:ident) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($ty), self.0)
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_id_impls!(ConceptId);
string_id_impls!(ExpressionId);
