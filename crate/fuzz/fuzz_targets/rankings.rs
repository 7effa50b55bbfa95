#![no_main]

use frc_core::ingest::{parse_rankings, rankings_document};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(ranking) = parse_rankings(text) {
        let again = parse_rankings(&rankings_document(&ranking).to_string()).expect("round trip");
        assert_eq!(again, ranking);
    }
});
