#![no_main]

use libfuzzer_sys::fuzz_target;
use mixsim::channels::{parse_channel_spec, to_channel_spec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(ch) = parse_channel_spec(text) else {
        return;
    };
    let Ok(out) = to_channel_spec(&ch, 4096) else {
        return;
    };
    let again = parse_channel_spec(&out).expect("serialized spec must parse");
    let a = ch.enumerate_explicit(4096).unwrap();
    let b = again.enumerate_explicit(4096).unwrap();
    assert_eq!(a.unitaries(), b.unitaries());
    for (x, y) in a.probs().iter().zip(b.probs()) {
        assert!((x - y).abs() < 1e-9);
    }
});
