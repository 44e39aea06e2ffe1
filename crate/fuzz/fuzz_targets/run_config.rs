#![no_main]

use hypercontrast::dataio::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = parse_config(text) {
        let _ = cfg.train_config();
        let _ = cfg.probe_config();
    }
});
