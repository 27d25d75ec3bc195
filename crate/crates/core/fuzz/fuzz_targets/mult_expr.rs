#![no_main]

use gstieltjes::catalog::parse_mult_expr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_mult_expr(s);
    }
});
