#![no_main]

use libfuzzer_sys::fuzz_target;
use postselect::io::{measurement_to_json, parse_measurement};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_measurement(text, None) {
        let again = parse_measurement(&measurement_to_json(&m), Some(m.dim())).expect("serialized measurement parses");
        assert_eq!(again, m);
    }
});
