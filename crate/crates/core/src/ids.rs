use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of one group and its manager.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupId(pub u32);

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque printable-ASCII member identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MemberId(String);

impl MemberId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let printable = id.bytes().all(|b| b.is_ascii_graphic());
        // These spellings are taken by GM, broadcast and adversary addresses.
        let reserved = id == "*" || id == "adversary" || id.starts_with("gm-");
        if id.is_empty() || id.len() > 255 || !printable || reserved {
            return Err(Error::InvalidMemberId(id));
        }
        Ok(Self(id))
    }

    /// `g<group>-u<index>`.
    pub fn for_member(group: GroupId, index: usize) -> Self {
        Self(format!("g{}-u{}", group.0, index))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
