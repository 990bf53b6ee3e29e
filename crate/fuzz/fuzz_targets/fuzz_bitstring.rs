//! Bitstring decoding must never panic and must round-trip; small
//! configurations also round-trip through their basis index.

#![no_main]

use libfuzzer_sys::fuzz_target;
use pathcut::encoding::Configuration;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = Configuration::from_bitstring(text) {
        assert_eq!(config.to_string(), text);
        if config.len() <= 64 && !config.is_empty() {
            let index = config.basis_index();
            assert_eq!(Configuration::from_basis_index(config.len(), index), config);
        }
    }
});
