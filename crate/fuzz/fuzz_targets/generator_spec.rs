#![no_main]
use libfuzzer_sys::fuzz_target;
use safecomb::synthgen::{generate, GeneratorSpec};

const MAX_RECORDS: usize = 2_000;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = GeneratorSpec::from_json(text) {
        if spec.total_records() <= MAX_RECORDS && spec.accounts <= MAX_RECORDS {
            let corpus = generate(&spec).unwrap();
            assert_eq!(corpus.records.len(), spec.total_records());
        }
    }
});
