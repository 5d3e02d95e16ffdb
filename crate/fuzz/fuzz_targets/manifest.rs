#![no_main]

use giftplace_cli::RunManifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(m) = RunManifest::from_json(s) {
            let text = m.to_json();
            let again = RunManifest::from_json(&text).expect("own output parses");
            assert_eq!(again.to_json(), text);
        }
    }
});
