//! The objective grammar parser must never panic, must only accept validated
//! specs, and must round-trip through its display form.

#![no_main]

use libfuzzer_sys::fuzz_target;
use pathcut::objective::ObjectiveKind;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(kind) = ObjectiveKind::parse(text) {
        assert!(kind.validate().is_ok());
        let reparsed = ObjectiveKind::parse(&kind.to_string()).expect("display form reparses");
        assert_eq!(reparsed, kind);
    }
});
