//! Tiny content-hashing helpers for manifests and cache keys.
//!
//! FNV-1a is enough here: hashes are used to detect configuration drift
//! between artifacts produced by the same toolchain, not to resist attackers.

/// 64-bit FNV-1a over a byte slice.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// FNV-1a of a string, formatted as 16 lowercase hex digits.
pub fn fnv1a_hex(s: &str) -> String {
    format!("{:016x}", fnv1a(s.as_bytes()))
}
