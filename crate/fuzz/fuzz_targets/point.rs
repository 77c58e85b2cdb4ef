#![no_main]

use libfuzzer_sys::fuzz_target;
use melon_rsk::json::parse_point;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_point(text) {
        let again = parse_point(&format!("{},{}", p.time, p.line)).expect("printed points parse");
        assert_eq!(again, p);
    }
});
