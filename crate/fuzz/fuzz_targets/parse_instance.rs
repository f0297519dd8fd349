#![no_main]

use libfuzzer_sys::fuzz_target;
use postselect::io::{instance_to_json, parse_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(inst) = parse_instance(text) {
        let again = parse_instance(&instance_to_json(&inst)).expect("serialized instance parses");
        assert_eq!(again.rho_op(), inst.rho_op());
        assert_eq!(again.sigma_op(), inst.sigma_op());
        assert_eq!(again.p_rho().to_bits(), inst.p_rho().to_bits());
    }
});
