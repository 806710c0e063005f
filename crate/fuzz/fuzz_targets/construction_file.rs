#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = geofence_core::ingest::parse_construction_file(text) {
        assert!(parsed.config.validate().is_ok());
    }
});
