#![no_main]

use libfuzzer_sys::fuzz_target;
use relflow::subnet::Subnetwork;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = Subnetwork::parse(text, "fuzz") {
        let again = Subnetwork::parse(&net.to_text(), "fuzz").expect("serialized cache parses");
        assert_eq!(again, net);
    }
});
