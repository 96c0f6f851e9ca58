#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // config parsing must reject arbitrary input gracefully, never panic
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = rrk_cli::RunConfig::from_json(text);
    }
});
