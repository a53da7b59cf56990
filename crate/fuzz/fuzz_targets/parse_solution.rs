//! Fuzzes the solution text parser. The input is split at the first NUL
//! byte: the left half must parse as an instance (otherwise the case is
//! uninteresting), the right half is fed to the solution parser against it.
//! Accepted solutions must survive a serialize/reparse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use mfas::instance::parse_instance;
use mfas::solution::{parse_solution, serialize_solution};

fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == 0).unwrap_or(data.len());
    let (left, right) = data.split_at(split);
    let right = right.get(1..).unwrap_or(&[]);

    let Ok(inst_text) = std::str::from_utf8(left) else {
        return;
    };
    let Ok(sol_text) = std::str::from_utf8(right) else {
        return;
    };
    let Ok(inst) = parse_instance(inst_text) else {
        return;
    };
    let Ok(sol) = parse_solution(sol_text, &inst) else {
        return;
    };
    // Parsed values are 10⁻⁹-grained, so rendering cannot fail.
    let rendered = serialize_solution(&sol).expect("parsed solutions serialize");
    let again = parse_solution(&rendered, &inst).expect("serialized solutions parse");
    assert_eq!(again, sol);
});
