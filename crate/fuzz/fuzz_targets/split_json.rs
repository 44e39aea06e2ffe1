#![no_main]

use hypercontrast::dataio::parse_split;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_split(text, None) {
        let n = f.train.len() + f.valid.len() + f.test.len();
        let _ = parse_split(text, Some(n));
    }
});
