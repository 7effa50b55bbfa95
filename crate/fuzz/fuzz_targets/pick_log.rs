#![no_main]

use frc_core::draft::{parse_pick_log, write_pick_log};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(log) = parse_pick_log(text) {
        assert_eq!(parse_pick_log(&write_pick_log(&log)).expect("round trip"), log);
    }
});
