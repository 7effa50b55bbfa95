#![no_main]

use frc_core::ingest::{parse_match_record, Winner};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_match_record(text) {
        assert_eq!(m.winner, Winner::from_totals(m.red_total, m.blue_total));
        let again = parse_match_record(&m.to_fixture().to_string()).expect("re-parse of a valid record");
        assert_eq!(again, m);
    }
});
