#![no_main]

use frc_core::ingest::EventDataset;
use libfuzzer_sys::fuzz_target;
use serde_json::Value;

fuzz_target!(|data: &[u8]| {
    let Ok(Value::Array(items)) = serde_json::from_slice::<Value>(data) else { return };
    let ds = EventDataset::from_values("2019fuzz", items.iter().enumerate().map(|(i, v)| (i.to_string(), v)));
    assert_eq!(ds.matches.len() + ds.skipped.len(), items.len());
});
