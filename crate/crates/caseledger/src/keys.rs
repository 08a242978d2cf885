//! User key material and the pluggable payload sealer.
//!
//! Users are identified on the ledger by the fingerprint (SHA-256) of their
//! public key bytes. Receipts and store-bound blobs are sealed to a
//! recipient's public key through the [`Sealer`] trait:
//!
//! - [`X25519Sealer`] — the real implementation: X25519 key agreement with
//!   an ephemeral key, ChaCha20-Poly1305 for the payload.
//! - [`IdentitySealer`] — a pass-through for tests and benchmarks, where the
//!   sealing cost would drown out what is being measured.
//!
//! Sealing is deterministic by construction: the ephemeral secret is derived
//! from the recipient key and the plaintext, so replaying a chain reproduces
//! byte-identical sealed payloads. The trade-off is that sealing the exact
//! same plaintext to the same recipient yields the exact same ciphertext;
//! payloads here always embed a timestamp and transaction id, which makes
//! them unique in practice.

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use curve25519_dalek::montgomery::MontgomeryPoint;
use serde::{Deserialize, Serialize};

use crate::digest::{digest, digest_parts, tag, Digest};
use crate::error::Error;

/// Public key material plus its derived fingerprint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKey {
    /// Raw public key bytes, hex in JSON.
    #[serde(with = "hex::serde")]
    pub bytes: Vec<u8>,
}

impl PublicKey {
    pub fn new(bytes: Vec<u8>) -> Self {
        Self { bytes }
    }

    /// SHA-256 of the key bytes; the user's ledger identity.
    pub fn fingerprint(&self) -> Digest {
        digest(&self.bytes)
    }
}

/// An X25519 keypair. The secret is 32 uniformly random bytes, clamped at
/// use per the X25519 function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyPair {
    #[serde(with = "hex::serde")]
    pub secret: Vec<u8>,
    pub public: PublicKey,
}

impl KeyPair {
    /// Generate from an RNG (pass a seeded RNG for reproducible test keys).
    pub fn generate<R: rand::RngCore>(rng: &mut R) -> Self {
        let mut secret = [0u8; 32];
        rng.fill_bytes(&mut secret);
        Self::from_secret(secret)
    }

    pub fn from_secret(secret: [u8; 32]) -> Self {
        let public = MontgomeryPoint::mul_base_clamped(secret);
        KeyPair {
            secret: secret.to_vec(),
            public: PublicKey::new(public.as_bytes().to_vec()),
        }
    }

    pub fn fingerprint(&self) -> Digest {
        self.public.fingerprint()
    }

    fn secret_bytes(&self) -> Result<[u8; 32], Error> {
        self.secret
            .as_slice()
            .try_into()
            .map_err(|_| Error::Unsealable("secret key must be 32 bytes".into()))
    }
}

/// A payload sealed to one recipient.
///
/// `recipient` is the fingerprint of the recipient's public key; only the
/// matching secret key opens the ciphertext (under the real sealer).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SealedPayload {
    pub recipient: Digest,
    /// Sealer that produced this payload ("x25519-chacha20poly1305" or "identity").
    pub scheme: String,
    /// Ephemeral public key, empty for the identity sealer.
    #[serde(with = "hex::serde")]
    pub ephemeral: Vec<u8>,
    #[serde(with = "hex::serde")]
    pub ciphertext: Vec<u8>,
}

/// Public-key sealing of receipts and store blobs.
pub trait Sealer: Send + Sync {
    fn seal(&self, recipient: &PublicKey, plaintext: &[u8]) -> SealedPayload;
    fn open(&self, keypair: &KeyPair, sealed: &SealedPayload) -> Result<Vec<u8>, Error>;
    fn scheme(&self) -> &'static str;
}

/// X25519 + ChaCha20-Poly1305 sealing with a derived ephemeral key.
#[derive(Debug, Default, Clone)]
pub struct X25519Sealer;

const X25519_SCHEME: &str = "x25519-chacha20poly1305";

impl X25519Sealer {
    fn derive_key(shared: &MontgomeryPoint, ephemeral_pk: &[u8], recipient_pk: &[u8]) -> Key {
        let k = digest_parts(
            tag::SEAL_KDF,
            &[b"key", shared.as_bytes(), ephemeral_pk, recipient_pk],
        );
        *Key::from_slice(k.as_bytes())
    }
}

impl Sealer for X25519Sealer {
    fn seal(&self, recipient: &PublicKey, plaintext: &[u8]) -> SealedPayload {
        // Deterministic ephemeral secret; see module docs.
        let eph_secret: [u8; 32] =
            digest_parts(tag::SEAL_KDF, &[b"eph", &recipient.bytes, plaintext]).0;
        let eph_pk = MontgomeryPoint::mul_base_clamped(eph_secret);
        let recipient_point = MontgomeryPoint(
            recipient
                .bytes
                .as_slice()
                .try_into()
                .expect("recipient public key must be 32 bytes"),
        );
        let shared = recipient_point.mul_clamped(eph_secret);
        let key = Self::derive_key(&shared, eph_pk.as_bytes(), &recipient.bytes);
        let cipher = ChaCha20Poly1305::new(&key);
        // Key is unique per (recipient, plaintext); a fixed nonce is safe.
        let ciphertext = cipher
            .encrypt(Nonce::from_slice(&[0u8; 12]), plaintext)
            .expect("chacha20poly1305 encryption is infallible for in-memory buffers");
        SealedPayload {
            recipient: recipient.fingerprint(),
            scheme: X25519_SCHEME.to_string(),
            ephemeral: eph_pk.as_bytes().to_vec(),
            ciphertext,
        }
    }

    fn open(&self, keypair: &KeyPair, sealed: &SealedPayload) -> Result<Vec<u8>, Error> {
        if sealed.scheme != X25519_SCHEME {
            return Err(Error::Unsealable(format!(
                "scheme mismatch: payload is {:?}",
                sealed.scheme
            )));
        }
        if sealed.recipient != keypair.fingerprint() {
            return Err(Error::Unsealable("payload addressed to a different key".into()));
        }
        let eph: [u8; 32] = sealed
            .ephemeral
            .as_slice()
            .try_into()
            .map_err(|_| Error::Unsealable("ephemeral key must be 32 bytes".into()))?;
        let shared = MontgomeryPoint(eph).mul_clamped(keypair.secret_bytes()?);
        let key = Self::derive_key(&shared, &sealed.ephemeral, &keypair.public.bytes);
        let cipher = ChaCha20Poly1305::new(&key);
        cipher
            .decrypt(Nonce::from_slice(&[0u8; 12]), sealed.ciphertext.as_ref())
            .map_err(|_| Error::Unsealable("authentication failed".into()))
    }

    fn scheme(&self) -> &'static str {
        X25519_SCHEME
    }
}

/// Pass-through sealer for tests and benchmarks.
#[derive(Debug, Default, Clone)]
pub struct IdentitySealer;

impl Sealer for IdentitySealer {
    fn seal(&self, recipient: &PublicKey, plaintext: &[u8]) -> SealedPayload {
        SealedPayload {
            recipient: recipient.fingerprint(),
            scheme: "identity".to_string(),
            ephemeral: Vec::new(),
            ciphertext: plaintext.to_vec(),
        }
    }

    fn open(&self, keypair: &KeyPair, sealed: &SealedPayload) -> Result<Vec<u8>, Error> {
        if sealed.recipient != keypair.fingerprint() {
            return Err(Error::Unsealable("payload addressed to a different key".into()));
        }
        Ok(sealed.ciphertext.clone())
    }

    fn scheme(&self) -> &'static str {
        "identity"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn pair(seed: u64) -> KeyPair {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        KeyPair::generate(&mut rng)
    }

    #[test]
    fn fingerprint_derived_from_bytes() {
        let kp = pair(1);
        assert_eq!(kp.public.fingerprint(), digest(&kp.public.bytes));
    }

    #[test]
    fn x25519_round_trip() {
        let kp = pair(2);
        let sealer = X25519Sealer;
        let sealed = sealer.seal(&kp.public, b"time=42, token=abc, case=C1");
        assert_eq!(sealed.recipient, kp.fingerprint());
        assert_ne!(sealed.ciphertext, b"time=42, token=abc, case=C1".to_vec());
        let opened = sealer.open(&kp, &sealed).unwrap();
        assert_eq!(opened, b"time=42, token=abc, case=C1".to_vec());
    }

    #[test]
    fn wrong_key_cannot_open() {
        let kp = pair(3);
        let other = pair(4);
        let sealer = X25519Sealer;
        let sealed = sealer.seal(&kp.public, b"secret");
        assert!(sealer.open(&other, &sealed).is_err());

        // Even with a forced matching fingerprint check, the AEAD tag fails.
        let mut forged = sealed.clone();
        forged.recipient = other.fingerprint();
        assert!(sealer.open(&other, &forged).is_err());
    }

    #[test]
    fn sealing_is_deterministic() {
        let kp = pair(5);
        let sealer = X25519Sealer;
        let a = sealer.seal(&kp.public, b"same payload");
        let b = sealer.seal(&kp.public, b"same payload");
        assert_eq!(a, b);
    }

    #[test]
    fn tampered_ciphertext_rejected() {
        let kp = pair(6);
        let sealer = X25519Sealer;
        let mut sealed = sealer.seal(&kp.public, b"payload");
        sealed.ciphertext[0] ^= 1;
        assert!(sealer.open(&kp, &sealed).is_err());
    }

    #[test]
    fn identity_sealer_round_trip() {
        let kp = pair(7);
        let sealer = IdentitySealer;
        let sealed = sealer.seal(&kp.public, b"plain");
        assert_eq!(sealed.ciphertext, b"plain".to_vec());
        assert_eq!(sealer.open(&kp, &sealed).unwrap(), b"plain".to_vec());
    }
}
