#![no_main]

use hypercontrast::dataio::{dataset_to_file, parse_dataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_dataset(text) {
        // Anything accepted must survive a write and re-read unchanged.
        let again = serde_json::to_string(&dataset_to_file(&d)).unwrap();
        assert_eq!(parse_dataset(&again).unwrap(), d);
    }
});
