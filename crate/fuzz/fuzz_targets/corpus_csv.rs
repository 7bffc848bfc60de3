#![no_main]
use libfuzzer_sys::fuzz_target;
use safecomb::corpus::{parse_csv_str, write_csv, ReadOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(corpus) = parse_csv_str(text, ReadOptions { lenient: true }) else {
        return;
    };
    let mut out = Vec::new();
    write_csv(&corpus.records, &mut out).unwrap();
    let again = parse_csv_str(std::str::from_utf8(&out).unwrap(), ReadOptions::default()).unwrap();
    assert_eq!(again.records, corpus.records);
});
