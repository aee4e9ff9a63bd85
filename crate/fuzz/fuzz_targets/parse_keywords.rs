#![no_main]

use libfuzzer_sys::fuzz_target;
use relflow::webgraph::KeywordIndex;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(index) = KeywordIndex::parse(text, "fuzz", n as usize) {
        let again = KeywordIndex::parse(&index.to_text(), "fuzz", n as usize).expect("serialized index parses");
        assert_eq!(again, index);
    }
});
