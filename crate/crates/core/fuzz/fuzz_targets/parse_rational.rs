#![no_main]

use gstieltjes::rational::{format_rational, parse_rational, parse_rational_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_rational(s) {
        // canonical form re-parses to the same value
        assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }
    let _ = parse_rational_list(s);
});
