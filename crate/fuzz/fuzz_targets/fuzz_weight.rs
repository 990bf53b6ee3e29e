//! Exact-decimal parsing must never panic; accepted weights round-trip
//! bit-exactly through their canonical display form.

#![no_main]

use libfuzzer_sys::fuzz_target;
use pathcut::graph::Weight;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(weight) = text.parse::<Weight>() {
        let shown = weight.to_string();
        let reparsed: Weight = shown.parse().expect("canonical form reparses");
        assert_eq!(reparsed, weight);
        assert_eq!(reparsed.to_string(), shown);
        let doubled = weight.checked_add(&weight);
        if let Some(doubled) = doubled {
            assert!(doubled >= weight);
        }
    }
});
