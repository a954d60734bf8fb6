//! Canonical JSON: keys sorted, compact separators, shortest round-trip float
//! formatting. Identical values always produce identical bytes.

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn to_canonical_value<T: Serialize>(value: &T) -> serde_json::Value {
    // serde_json::Map is a BTreeMap here (no preserve_order), so keys sort.
    serde_json::to_value(value).expect("value serializes to JSON")
}

pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    to_canonical_value(value).to_string()
}

/// Hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

/// First 16 hex characters of the SHA-256, used as a short digest in logs.
pub fn short_digest(bytes: impl AsRef<[u8]>) -> String {
    sha256_hex(bytes)[..16].to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn keys_are_sorted_regardless_of_insertion_order() {
        let mut a = HashMap::new();
        a.insert("zeta", 1.5);
        a.insert("alpha", 0.1);
        assert_eq!(to_canonical_json(&a), r#"{"alpha":0.1,"zeta":1.5}"#);
    }
}
