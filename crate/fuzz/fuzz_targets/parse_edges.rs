#![no_main]

use libfuzzer_sys::fuzz_target;
use relflow::webgraph::{parse_edges, Digraph};

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let n = n as usize;
    if let Ok(edges) = parse_edges(text, "fuzz", n) {
        assert!(edges.iter().all(|&(a, b)| a < n && b < n));
        let (g, _) = Digraph::from_edges(n, edges).expect("parsed ids are in range");
        assert!(g.edges().all(|(a, b)| a != b));
    }
});
