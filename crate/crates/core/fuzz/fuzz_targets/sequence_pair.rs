#![no_main]

use gstieltjes::sequences::{is_weak_supermajorisation, pte_degree, SequencePair};
use libfuzzer_sys::fuzz_target;

// input is "a|b"
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Some((a, b)) = s.split_once('|') else { return };
    if let Ok(pair) = SequencePair::parse(a, b) {
        if pair.len() <= 16 {
            let _ = pte_degree(&pair);
            let _ = is_weak_supermajorisation(&pair);
        }
    }
});
