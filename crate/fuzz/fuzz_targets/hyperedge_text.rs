#![no_main]

use hypercontrast::dataio::parse_hyperedge_text;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = parse_hyperedge_text(text, None) {
        let _ = parse_hyperedge_text(text, Some(h.num_nodes())).unwrap();
    }
});
