#![no_main]

use gkdv_core::solver::decode_spectral_dump;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(dump) = decode_spectral_dump(data) {
        assert_eq!(dump.times.len(), dump.coeffs.len());
        let _ = dump.fields();
    }
});
