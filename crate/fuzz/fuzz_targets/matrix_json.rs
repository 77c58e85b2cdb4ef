#![no_main]

use libfuzzer_sys::fuzz_target;
use melon_rsk::json::{matrix_from_json, matrix_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(a) = matrix_from_json(text) {
        let again = matrix_from_json(&matrix_to_json(&a)).expect("written matrices parse");
        assert_eq!(again, a);
    }
});
