#![no_main]

use libfuzzer_sys::fuzz_target;
use melon_rsk::suite::{StatTestConfig, SuiteConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = SuiteConfig::from_json(text);
    let _ = StatTestConfig::from_json(text);
});
