#![no_main]

use libfuzzer_sys::fuzz_target;
use relflow::eval::parse_runs;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_runs(text, "fuzz");
});
