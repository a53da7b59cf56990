//! Fuzzes the instance text parser: arbitrary input must either fail with
//! an error or yield an instance that survives a serialize/reparse round
//! trip unchanged.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mfas::instance::{parse_instance, serialize_instance};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(inst) = parse_instance(text) else {
        return;
    };
    let rendered = serialize_instance(&inst);
    let again = parse_instance(&rendered).expect("serialized instances parse");
    assert_eq!(again.digest(), inst.digest());
    assert_eq!(serialize_instance(&again), rendered);
});
