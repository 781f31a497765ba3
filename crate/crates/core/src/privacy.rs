//! Participant pseudonymization.
//!
//! Raw participant identifiers are consumed here and nowhere else. The token
//! is HMAC-SHA256 keyed by the salt, rendered as 64 lowercase hex digits.

use hmac::{Hmac, Mac};
use sha2::Sha256;
use thiserror::Error;

pub const MIN_SALT_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrivacyError {
    #[error("salt must be at least {MIN_SALT_LEN} bytes, got {0}")]
    SaltTooShort(usize),
}

pub fn pseudonymize(raw_id: &str, salt: &[u8]) -> Result<String, PrivacyError> {
    if salt.len() < MIN_SALT_LEN {
        return Err(PrivacyError::SaltTooShort(salt.len()));
    }
    let mut mac = Hmac::<Sha256>::new_from_slice(salt).expect("hmac accepts any key length");
    mac.update(raw_id.as_bytes());
    Ok(hex::encode(mac.finalize().into_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const S1: &[u8] = b"0123456789abcdef-salt-one";
    const S2: &[u8] = b"0123456789abcdef-salt-two";

    #[test]
    fn deterministic() {
        assert_eq!(pseudonymize("child-07", S1).unwrap(), pseudonymize("child-07", S1).unwrap());
    }

    #[test]
    fn salt_separates() {
        assert_ne!(pseudonymize("child-07", S1).unwrap(), pseudonymize("child-07", S2).unwrap());
    }

    #[test]
    fn token_shape_and_no_leak() {
        let token = pseudonymize("child-07", S1).unwrap();
        assert_eq!(token.len(), 64);
        assert!(token.chars().all(|c| c.is_ascii_hexdigit()));
        assert!(!token.contains("child-07"));
        // every substring of the raw id of length >= 3 is absent too
        let raw = "child-07";
        for len in 3..=raw.len() {
            for start in 0..=raw.len() - len {
                assert!(!token.contains(&raw[start..start + len]));
            }
        }
    }

    #[test]
    fn short_salt_rejected() {
        assert_eq!(pseudonymize("x", b"short"), Err(PrivacyError::SaltTooShort(5)));
    }

    #[test]
    fn rfc4231_case_1() {
        let key = [0x0b_u8; 20];
        assert_eq!(
            pseudonymize("Hi There", &key).unwrap(),
            "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7"
        );
    }
}
