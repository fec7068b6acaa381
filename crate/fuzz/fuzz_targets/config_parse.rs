#![no_main]

use libfuzzer_sys::fuzz_target;
use mbm_cli::config::parse_config_str;

fuzz_target!(|data: &[u8]| {
    if let Ok(src) = std::str::from_utf8(data) {
        if let Ok(sweep) = parse_config_str(src) {
            sweep.validate().expect("parsed config failed validation");
        }
    }
});
