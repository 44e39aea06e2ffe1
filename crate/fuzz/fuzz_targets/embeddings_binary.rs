#![no_main]

use hypercontrast::dataio::parse_embeddings_binary;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_embeddings_binary(data);
});
