#![no_main]

use giftplace::bench::FanoutProfile;
use giftplace_cli::jobs::Init;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = s.parse::<FanoutProfile>() {
        let again: FanoutProfile = p.to_string().parse().expect("display parses");
        assert_eq!(again, p);
    }
    if let Ok(init) = s.parse::<Init>() {
        assert_eq!(init.to_string().parse::<Init>().ok(), Some(init));
    }
});
