//! Character-level tokens.
//!
//! Every task stream is tokenized one character per token. There is no
//! subword merging and no implicit whitespace handling: a space in raw text
//! becomes a space token.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A single-symbol token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(char);

impl Token {
    pub const fn new(c: char) -> Self {
        Token(c)
    }

    pub fn as_char(self) -> char {
        self.0
    }

    /// Decimal value of a digit token.
    pub fn digit(self) -> Option<u8> {
        self.0.to_digit(10).map(|d| d as u8)
    }

    pub(crate) fn from_digit(d: u8) -> Self {
        debug_assert!(d < 10);
        Token((b'0' + d) as char)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<char> for Token {
    fn from(c: char) -> Self {
        Token(c)
    }
}

impl Serialize for Token {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut buf = [0u8; 4];
        s.serialize_str(self.0.encode_utf8(&mut buf))
    }
}

impl<'de> Deserialize<'de> for Token {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(Token(c)),
            _ => Err(serde::de::Error::custom(format!(
                "token must be exactly one character, got {s:?}"
            ))),
        }
    }
}

/// Split text into one token per character.
pub fn tokenize_chars(text: &str) -> Result<Vec<Token>> {
    if text.is_empty() {
        return Err(Error::InvalidInput("cannot tokenize empty text".into()));
    }
    Ok(text.chars().map(Token).collect())
}

/// Concatenate tokens back into text.
pub fn detokenize(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.0).collect()
}

/// Serde adapter storing a token list as one string.
pub(crate) mod as_text {
    use super::Token;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(tokens: &[Token], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::detokenize(tokens))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Token>, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.chars().map(Token).collect())
    }
}
