#![no_main]

use libfuzzer_sys::fuzz_target;
use relflow::eval::parse_judgments;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(judgments) = parse_judgments(text, "fuzz") {
        for set in judgments.values() {
            assert!(set.results.values().all(|j| (0.0..=1.0).contains(&j.rel())));
        }
    }
});
