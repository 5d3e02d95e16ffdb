#![no_main]

use giftplace::netlist::bookshelf::parse_aux;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_aux(s, "fuzz.aux");
    }
});
