#![no_main]

use giftplace_cli::settings::{parse_terms, Settings};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(settings) = Settings::parse(s, "fuzz.cfg") {
            let _ = settings.gift_config();
        }
        let _ = parse_terms(s);
    }
});
