use std::borrow::Borrow;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Replica identifier: 1 to 16 bytes of printable ASCII, no whitespace.
///
/// Authors order bytewise; that order breaks ties between timestamps with
/// equal author indices. The no-whitespace rule keeps identifiers safe for
/// the space-separated wire and dump formats.
#[derive(Clone, Copy)]
pub struct Author {
    len: u8,
    bytes: [u8; Author::MAX_LEN],
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AuthorError {
    #[error("author id is empty")]
    Empty,
    #[error("author id is {0} bytes, limit is {}", Author::MAX_LEN)]
    TooLong(usize),
    #[error("author id contains byte {0:#04x}; only printable ASCII without whitespace is allowed")]
    BadByte(u8),
}

impl Author {
    pub const MAX_LEN: usize = 16;

    pub fn new(id: &str) -> Result<Self, AuthorError> {
        let raw = id.as_bytes();
        if raw.is_empty() {
            return Err(AuthorError::Empty);
        }
        if raw.len() > Self::MAX_LEN {
            return Err(AuthorError::TooLong(raw.len()));
        }
        if let Some(&b) = raw.iter().find(|b| !(0x21..=0x7e).contains(*b)) {
            return Err(AuthorError::BadByte(b));
        }
        let mut bytes = [0u8; Self::MAX_LEN];
        bytes[..raw.len()].copy_from_slice(raw);
        Ok(Author { len: raw.len() as u8, bytes })
    }

    pub fn as_str(&self) -> &str {
        // Validated printable ASCII at construction.
        std::str::from_utf8(&self.bytes[..self.len as usize]).unwrap()
    }
}

impl PartialEq for Author {
    fn eq(&self, other: &Self) -> bool {
        self.as_str() == other.as_str()
    }
}

impl Eq for Author {}

impl PartialOrd for Author {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Author {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl std::hash::Hash for Author {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.as_str().hash(state);
    }
}

impl Borrow<str> for Author {
    fn borrow(&self) -> &str {
        self.as_str()
    }
}

impl FromStr for Author {
    type Err = AuthorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Author::new(s)
    }
}

impl fmt::Display for Author {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for Author {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Author({})", self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_plain_ids() {
        for id in ["a", "alpha", "r2", "x_1-2.3", "!sixteen-bytes!!"] {
            let a = Author::new(id).unwrap();
            assert_eq!(a.as_str(), id);
        }
    }

    #[test]
    fn rejects_bad_ids() {
        assert_eq!(Author::new(""), Err(AuthorError::Empty));
        assert_eq!(Author::new("seventeen-bytes-x"), Err(AuthorError::TooLong(17)));
        assert_eq!(Author::new("a b"), Err(AuthorError::BadByte(b' ')));
        assert_eq!(Author::new("tab\there"), Err(AuthorError::BadByte(b'\t')));
        assert!(matches!(Author::new("héllo"), Err(AuthorError::BadByte(_))));
    }

    #[test]
    fn orders_bytewise() {
        let a = Author::new("alpha").unwrap();
        let b = Author::new("beta").unwrap();
        let g = Author::new("gamma").unwrap();
        assert!(a < b && b < g);
        // Prefixes sort before their extensions, never by length alone.
        assert!(Author::new("ab").unwrap() < Author::new("abc").unwrap());
        assert!(Author::new("b").unwrap() > Author::new("abc").unwrap());
    }
}
