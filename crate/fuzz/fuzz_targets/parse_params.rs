#![no_main]

use libfuzzer_sys::fuzz_target;
use postselect::io::{params_to_json, parse_params};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_params(text, None) {
        let again = parse_params(&params_to_json(&p), None).expect("serialized parameters parse");
        assert_eq!(again, p);
    }
});
