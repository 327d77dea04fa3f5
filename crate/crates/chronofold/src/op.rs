use std::fmt;

use thiserror::Error;

use crate::author::Author;
use crate::timestamp::Timestamp;

/// Payload of one op. Text is stored as Unicode scalar values, one op per
/// codepoint; deletions are first-class `Tombstone` ops that point at the
/// `Char` they kill.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum OpValue {
    Root,
    Char(char),
    Tombstone,
}

impl OpValue {
    pub fn is_char(self) -> bool {
        matches!(self, OpValue::Char(_))
    }
}

/// One edit: `id` names the op, `parent` is the op it causally attaches to
/// (its causal-tree parent), `val` is the payload.
///
/// Shape rules enforced at construction:
/// - `val == Root` exactly when `parent == id` (the self-referential root);
/// - any other op carries `id.andx > parent.andx`, since an author numbers
///   an op after the log position where it saw the parent.
///
/// Tombstones must target a `Char`; that needs a log to check against, so it
/// is enforced where ops meet a document, not here.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Op {
    pub id: Timestamp,
    pub parent: Timestamp,
    pub val: OpValue,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("root op {0} must reference itself (got {1})")]
    RootRef(Timestamp, Timestamp),
    #[error("non-root op {0} may not reference itself")]
    SelfRef(Timestamp),
    #[error("op {id} must carry an author index above its parent {parent}")]
    AndxNotAboveParent { id: Timestamp, parent: Timestamp },
}

impl Op {
    pub fn new(id: Timestamp, parent: Timestamp, val: OpValue) -> Result<Self, OpError> {
        match val {
            OpValue::Root => {
                if parent != id {
                    return Err(OpError::RootRef(id, parent));
                }
            }
            _ => {
                if parent == id {
                    return Err(OpError::SelfRef(id));
                }
                if id.andx <= parent.andx {
                    return Err(OpError::AndxNotAboveParent { id, parent });
                }
            }
        }
        Ok(Op { id, parent, val })
    }

    /// The op every document starts from: `<1, creator>` referencing itself.
    pub fn root(creator: Author) -> Self {
        let id = Timestamp::new(1, creator);
        Op { id, parent: id, val: OpValue::Root }
    }

    pub fn is_root(&self) -> bool {
        self.val == OpValue::Root
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let val = match self.val {
            OpValue::Root => "Root".to_string(),
            OpValue::Tombstone => "Tombstone".to_string(),
            OpValue::Char(c) => format!("{c:?}"),
        };
        write!(f, "({} ref {} {})", self.id, self.parent, val)
    }
}
