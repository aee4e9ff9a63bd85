#![no_main]

use libfuzzer_sys::fuzz_target;
use relflow::webgraph::UrlTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = UrlTable::parse(text, "fuzz") {
        let again = UrlTable::parse(&table.to_text(), "fuzz").expect("serialized table parses");
        assert_eq!(again, table);
    }
});
