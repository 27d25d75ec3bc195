#![no_main]

use gstieltjes::representations::VerificationReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(report) = VerificationReport::from_json(s) {
        let back = VerificationReport::from_json(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }
});
