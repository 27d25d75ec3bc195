#![no_main]

use gstieltjes::representations::IdentityId;
use gstieltjes::vertical::VerticalIdentity;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(id) = s.parse::<IdentityId>() {
        assert_eq!(id.to_string().parse::<IdentityId>().unwrap(), id);
    }
    let _ = s.parse::<VerticalIdentity>();
});
