use gazelens::export::render_artifacts;
use gazelens::pipeline::{analyze, AnalysisConfig};
use gazelens::privacy::{pseudonymize, PrivacyError, MIN_SALT_LEN};
use gazelens_oracles::fuzz_case;
use proptest::prelude::*;

proptest! {
    #[test]
    fn pseudonym_stable_and_salt_separated(
        id in "[A-Za-z0-9_-]{1,24}",
        salt_a in prop::collection::vec(any::<u8>(), MIN_SALT_LEN..48),
        salt_b in prop::collection::vec(any::<u8>(), MIN_SALT_LEN..48),
    ) {
        let a1 = pseudonymize(&id, &salt_a).unwrap();
        let a2 = pseudonymize(&id, &salt_a).unwrap();
        prop_assert_eq!(&a1, &a2);
        prop_assert_eq!(a1.len(), 64);
        prop_assert!(a1.bytes().all(|b| b.is_ascii_hexdigit()));
        if salt_a != salt_b {
            prop_assert_ne!(a1, pseudonymize(&id, &salt_b).unwrap());
        }
    }

    #[test]
    fn short_salt_refused(salt in prop::collection::vec(any::<u8>(), 0..MIN_SALT_LEN)) {
        prop_assert_eq!(pseudonymize("child-7", &salt), Err(PrivacyError::SaltTooShort(salt.len())));
    }
}

#[test]
fn artifacts_never_carry_the_raw_identifier() {
    let raw = "participant-Zoe-Q7731";
    let salt = b"school-district-salt-0001";
    for seed in 0..40 {
        let (mut session, aois) = fuzz_case(seed, 500);
        session.participant_pseudonym = pseudonymize(raw, salt).unwrap();
        let a = analyze(&session, &aois, &AnalysisConfig::default()).unwrap();
        for artifact in render_artifacts(&a) {
            let text = String::from_utf8_lossy(&artifact.bytes);
            assert!(!text.contains(raw), "{} leaks the identifier", artifact.path);
            assert!(!text.contains("school-district-salt"), "{} leaks the salt", artifact.path);
        }
    }
}
