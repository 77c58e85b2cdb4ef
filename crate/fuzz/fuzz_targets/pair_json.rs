#![no_main]

use libfuzzer_sys::fuzz_target;
use melon_rsk::json::{pair_from_json, pair_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(pair) = pair_from_json(text) {
        let again = pair_from_json(&pair_to_json(&pair)).expect("written pairs parse");
        assert_eq!(again, pair);
        let _ = pair.validate();
    }
});
