#![no_main]

use geofence_core::store::FeatureStore;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(doc) = geofence_core::ingest::parse_osm_xml(data) {
        // whatever parses must also index
        let _ = FeatureStore::new(doc.features);
    }
});
