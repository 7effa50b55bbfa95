#![no_main]

use frc_core::schema::YearSchema;
use frc_core::Indicator;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(schema) = YearSchema::from_json_str(text) {
        for indicator in Indicator::SCORING {
            assert!(schema.terms(indicator).iter().all(|t| t.weight.is_finite() && t.weight >= 0.0));
        }
    }
});
