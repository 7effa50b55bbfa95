#![no_main]

use frc_core::predictor::TrainedModel;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = TrainedModel::from_json_str(text) {
        // A model that loads must be usable.
        let p = model.predict_features(&[0.5; 14]).expect("loaded model predicts");
        assert!((0.0..=1.0).contains(&p.probability));
    }
});
