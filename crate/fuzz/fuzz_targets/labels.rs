#![no_main]
use libfuzzer_sys::fuzz_target;
use safecomb::corpus::{parse_labels_str, CorpusFormat};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_labels_str(text, CorpusFormat::Jsonl);
        let _ = parse_labels_str(text, CorpusFormat::Csv);
    }
});
