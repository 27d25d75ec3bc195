#![no_main]

use gstieltjes::catalog::parse_custom_model;
use gstieltjes::rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(model) = parse_custom_model(s) {
        let _ = model.zeros.first_zeros(8);
        let _ = model.zeros.zeros_up_to(&rational::int(16));
    }
});
