#![no_main]
use libfuzzer_sys::fuzz_target;
use safecomb::cluster::{approximate_predict, ClusterModel};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // A model that loads must be usable for prediction.
    if let Ok(model) = ClusterModel::from_json(text) {
        let vectors: Vec<_> = model.points.iter().take(8).map(|p| p.vector).collect();
        let _ = approximate_predict(&model, &vectors);
    }
});
