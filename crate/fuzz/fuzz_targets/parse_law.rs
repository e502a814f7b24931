#![no_main]

use curveflow::SpeedLaw;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(law) = SpeedLaw::parse(s) {
        // whatever parses must survive its own label
        let again = SpeedLaw::parse(law.label()).expect("label re-parses");
        assert_eq!(again.label(), law.label());
    }
});
