//! Small content-hashing helpers shared across modules.

use sha2::{Digest, Sha256};

/// SHA-256 over the concatenation of `parts`, truncated to the first 8 bytes
/// and rendered as 16 lowercase hex characters.
pub(crate) fn sha256_hex16<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let bytes = sha256_prefix8(parts);
    let mut out = String::with_capacity(16);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// SHA-256 over the concatenation of `parts`, truncated to a big-endian u64.
pub(crate) fn sha256_u64<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> u64 {
    u64::from_be_bytes(sha256_prefix8(parts))
}

fn sha256_prefix8<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> [u8; 8] {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut prefix = [0u8; 8];
    prefix.copy_from_slice(&digest[..8]);
    prefix
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex16_is_prefix_of_u64() {
        let parts = [b"alpha".as_slice(), b"beta".as_slice()];
        let hex = sha256_hex16(parts);
        let num = sha256_u64(parts);
        assert_eq!(hex, format!("{num:016x}"));
        assert_eq!(hex.len(), 16);
    }

    #[test]
    fn concatenation_sensitive_to_boundaries_not_required() {
        // Same concatenated bytes hash identically regardless of chunking.
        let a = sha256_u64([b"ab".as_slice(), b"c".as_slice()]);
        let b = sha256_u64([b"abc".as_slice()]);
        assert_eq!(a, b);
    }
}
