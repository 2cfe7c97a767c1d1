#![no_main]

use libfuzzer_sys::fuzz_target;
use mixsim::channels::parse_channel_spec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // rejection is fine; panics are not
        if let Ok(ch) = parse_channel_spec(text) {
            assert!(ch.n() >= 1);
        }
    }
});
