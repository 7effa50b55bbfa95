#![no_main]

use frc_core::stats::ProfileSet;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(set) = ProfileSet::from_json_str(text) {
        assert!(set.profiles.values().all(|p| p.normalized.is_normalized()));
        let _ = set.average_alliance();
    }
});
