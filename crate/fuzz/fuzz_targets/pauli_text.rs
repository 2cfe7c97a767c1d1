#![no_main]

use libfuzzer_sys::fuzz_target;
use mixsim::pauli::{BitString, PauliString};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = text.parse::<PauliString>() {
        assert_eq!(p.to_string(), text);
        let back: PauliString = p.to_string().parse().unwrap();
        assert_eq!(back, p);
        if let Ok(k) = p.to_index() {
            assert_eq!(PauliString::from_index(p.n(), k).unwrap(), p);
        }
        let sq = p.mul(&p).unwrap();
        assert!(sq.pauli.is_identity());
    }
    let _ = text.parse::<BitString>();
});
