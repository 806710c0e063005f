#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(uav) = geofence_core::ingest::parse_uav_line(text) {
        assert!((0.0..360.0).contains(&uav.heading_deg));
        assert!(uav.velocity_ms >= 0.0);
    }
});
