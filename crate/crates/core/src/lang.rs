use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CoreError;

/// Two-letter lowercase language identifier (`fr`, `ar`, `en`, ...).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LanguageCode([u8; 2]);

impl LanguageCode {
    pub const FR: LanguageCode = LanguageCode(*b"fr");
    pub const AR: LanguageCode = LanguageCode(*b"ar");
    pub const EN: LanguageCode = LanguageCode(*b"en");

    /// Languages the engine ships stopword lists and normalization rules for.
    pub const SUPPORTED: [LanguageCode; 3] = [Self::FR, Self::AR, Self::EN];

    pub fn new(code: &str) -> Result<Self, CoreError> {
        let bytes = code.as_bytes();
        if bytes.len() == 2 && bytes.iter().all(u8::is_ascii_lowercase) {
            Ok(LanguageCode([bytes[0], bytes[1]]))
        } else {
            Err(CoreError::InvalidLanguage(code.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        // Both bytes are ASCII lowercase by construction.
        std::str::from_utf8(&self.0).unwrap_or("??")
    }

    pub fn is_supported(&self) -> bool {
        Self::SUPPORTED.contains(self)
    }
}

impl Default for LanguageCode {
    fn default() -> Self {
        Self::FR
    }
}

impl FromStr for LanguageCode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageCode::new(s)
    }
}

impl fmt::Display for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for LanguageCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LanguageCode({})", self.as_str())
    }
}

impl Serialize for LanguageCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LanguageCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        LanguageCode::new(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_two_lowercase_letters() {
        assert_eq!(LanguageCode::new("fr").unwrap(), LanguageCode::FR);
        assert_eq!(LanguageCode::new("de").unwrap().as_str(), "de");
        assert!(!LanguageCode::new("de").unwrap().is_supported());
    }

    #[test]
    fn rejects_malformed_codes() {
        for bad in ["", "f", "FR", "fra", "f1", "é"] {
            assert!(LanguageCode::new(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn serde_as_plain_string() {
        let json = serde_json::to_string(&LanguageCode::AR).unwrap();
        assert_eq!(json, "\"ar\"");
        let back: LanguageCode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, LanguageCode::AR);
        assert!(serde_json::from_str::<LanguageCode>("\"AR\"").is_err());
    }
}
