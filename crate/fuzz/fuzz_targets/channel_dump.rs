#![no_main]

use libfuzzer_sys::fuzz_target;
use mbm_core::ChannelSet;

fuzz_target!(|data: &[u8]| {
    if let Ok(h) = ChannelSet::from_bytes(data) {
        // Anything accepted must survive a round trip unchanged.
        let again = ChannelSet::from_bytes(&h.to_bytes()).expect("re-encoded dump rejected");
        assert_eq!(again.to_bytes(), h.to_bytes());
    }
});
