#![no_main]

use hypercontrast::dataio::parse_embeddings_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_embeddings_csv(text);
    }
});
