#![no_main]

use gkdv_cli::{parse_pairs, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(pairs) = parse_pairs(text) else {
        return;
    };
    if let Ok(cfg) = RunConfig::from_pairs(pairs.iter().map(|(_, k, v)| (k.as_str(), v.as_str()))) {
        // the echo must parse back to the same configuration
        let again = parse_pairs(&cfg.to_text()).expect("echo parses");
        let back = RunConfig::from_pairs(again.iter().map(|(_, k, v)| (k.as_str(), v.as_str()))).expect("echo validates");
        assert_eq!(back, cfg);
    }
});
