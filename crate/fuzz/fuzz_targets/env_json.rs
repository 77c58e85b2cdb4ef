#![no_main]

use libfuzzer_sys::fuzz_target;
use melon_rsk::json::{env_from_json, env_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(env) = env_from_json(text) {
        let again = env_from_json(&env_to_json(&env)).expect("written envs parse");
        assert_eq!(again, env);
    }
});
