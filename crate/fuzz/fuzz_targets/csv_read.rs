#![no_main]

use libfuzzer_sys::fuzz_target;
use mbm_cli::output::read_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_csv(data);
});
