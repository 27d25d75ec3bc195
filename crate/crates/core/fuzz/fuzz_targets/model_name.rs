#![no_main]

use gstieltjes::catalog::{make_model, parse_model_name};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(kind) = parse_model_name(s) {
        let _ = make_model(&kind);
    }
});
