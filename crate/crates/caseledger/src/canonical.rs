//! Canonical byte encoding used for everything that gets hashed.
//!
//! The encoding is fixed so that the same logical value always produces
//! identical bytes on any machine:
//!
//! - fields are written in a fixed order, no maps or reflection;
//! - integers are big-endian fixed width;
//! - every variable-length field is length-prefixed with a `u32`;
//! - optional fields write a presence byte (`0x00` absent, `0x01` present).
//!
//! There is intentionally no decoder. Canonical bytes exist to be hashed,
//! not to be a wire format; JSON carries the data at rest.

/// Append-only writer for canonical bytes.
#[derive(Debug, Default)]
pub struct CanonicalWriter {
    buf: Vec<u8>,
}

impl CanonicalWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Start a buffer with a domain tag byte.
    pub fn tagged(tag: u8) -> Self {
        let mut w = Self::new();
        w.put_u8(tag);
        w
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    /// Length-prefixed byte string.
    pub fn put_bytes(&mut self, v: &[u8]) {
        self.put_u32(v.len() as u32);
        self.buf.extend_from_slice(v);
    }

    /// Length-prefixed UTF-8 string.
    pub fn put_str(&mut self, v: &str) {
        self.put_bytes(v.as_bytes());
    }

    /// Fixed-width 32-byte digest, no length prefix.
    pub fn put_digest(&mut self, v: &crate::digest::Digest) {
        self.buf.extend_from_slice(v.as_bytes());
    }

    /// Optional field: presence byte, then the value if present.
    pub fn put_opt_str(&mut self, v: Option<&str>) {
        match v {
            None => self.put_u8(0x00),
            Some(s) => {
                self.put_u8(0x01);
                self.put_str(s);
            }
        }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_fixed_and_length_prefixed() {
        let mut w = CanonicalWriter::tagged(0x7f);
        w.put_str("ab");
        w.put_u64(5);
        w.put_opt_str(None);
        assert_eq!(
            w.into_bytes(),
            vec![0x7f, 0, 0, 0, 2, b'a', b'b', 0, 0, 0, 0, 0, 0, 0, 5, 0x00]
        );
    }

    #[test]
    fn empty_string_still_carries_length() {
        let mut a = CanonicalWriter::new();
        a.put_str("");
        a.put_str("x");
        let mut b = CanonicalWriter::new();
        b.put_str("x");
        b.put_str("");
        // Length prefixes keep adjacent variable fields unambiguous.
        assert_ne!(a.into_bytes(), b.into_bytes());
    }
}
