#![no_main]

use geofence_core::ingest::{parse_wkt, serialize_wkt};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(geom) = parse_wkt(text) {
        let again = parse_wkt(&serialize_wkt(&geom)).expect("serialized WKT must parse");
        assert_eq!(geom, again);
    }
});
