#![no_main]

use curveflow::io::CurveDescriptor;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(curve) = s.parse::<CurveDescriptor>() {
        let again: CurveDescriptor = curve.to_string().parse().expect("display re-parses");
        assert_eq!(again.to_string(), curve.to_string());
    }
});
