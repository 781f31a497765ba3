use gazelens::session::{parse_session, serialize_session, FormatOptions, IngestError};
use gazelens::synth::{synthetic_session, SessionShape};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn serialize_then_parse_is_identity(seed in any::<u64>(), n in 1usize..300, semicolon in any::<bool>()) {
        let shape = SessionShape { samples: n, ..SessionShape::default() };
        let mut session = synthetic_session(&shape, seed);
        session.participant_pseudonym.clear();
        let delimiter = if semicolon { b';' } else { b',' };
        let text = serialize_session(&session, delimiter);
        let opts = FormatOptions { delimiter, ..FormatOptions::default() };
        let parsed = parse_session(text.as_bytes(), &opts).unwrap();
        prop_assert_eq!(parsed.ledger.rows_rejected, 0);
        prop_assert_eq!(parsed.session, session);
    }

    #[test]
    fn ledger_accounts_for_every_row(lines in prop::collection::vec("[0-9a-z.,;E+ -]{0,24}", 0..40)) {
        let text = format!("Timestamp,X,Y,Message,Obj-X,Obj-Y,Obj-Z\n{}\n", lines.join("\n"));
        match parse_session(text.as_bytes(), &FormatOptions::default()) {
            Ok(p) => {
                let l = &p.ledger;
                prop_assert_eq!(l.rows_total, l.rows_accepted + l.rows_rejected);
                prop_assert_eq!(l.rows_rejected, l.rejected.len());
                prop_assert_eq!(l.rows_accepted, p.session.samples.len() + l.event_only_rows);
                prop_assert!(p.session.samples.windows(2).all(|w| w[0].timestamp_ms <= w[1].timestamp_ms));
            }
            Err(IngestError::EmptySession) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
