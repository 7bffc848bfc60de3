#![no_main]
use libfuzzer_sys::fuzz_target;
use safecomb::patterns::PatternConfig;
use safecomb::pipeline::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = RunConfig::from_toml(text) {
        let _ = config.validate();
        if let Ok(again) = config.to_toml().and_then(|t| RunConfig::from_toml(&t)) {
            assert_eq!(again.seed, config.seed);
        }
    }
    if let Ok(patterns) = PatternConfig::from_toml(text) {
        let _ = patterns.prototype_vectors();
    }
});
