#![no_main]
use libfuzzer_sys::fuzz_target;
use safecomb::corpus::{parse_jsonl_str, write_jsonl, ReadOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for lenient in [false, true] {
        let corpus = parse_jsonl_str(text, ReadOptions { lenient });
        assert_eq!(corpus.records.len(), corpus.report.accepted);
        // Accepted records survive a write/read round trip unchanged.
        let mut out = Vec::new();
        write_jsonl(&corpus.records, &mut out).unwrap();
        let again = parse_jsonl_str(std::str::from_utf8(&out).unwrap(), ReadOptions::default());
        assert_eq!(again.records, corpus.records);
    }
});
