#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(heights) = geofence_core::ingest::parse_height_csv(text) {
        assert!(heights.values().all(|h| h.is_finite()));
    }
});
