#![no_main]

use frc_core::predictor::ParamGrid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = ParamGrid::from_json_str(text) {
        // Enumeration is cheap; training is not, so stop there.
        if grid.len() <= 4096 {
            assert_eq!(grid.configs(0).len(), grid.len());
        }
    }
});
