#![no_main]

use libfuzzer_sys::fuzz_target;
use mbm_core::{Constellation, MbmConfig, MbmSymbol};

fuzz_target!(|data: &[u8]| {
    let [a, b, c, d, rest @ ..] = data else { return };
    let n_rf = 1 + (*a as usize % 6);
    let constellation = match b % 4 {
        0 => Constellation::bpsk(),
        1 => Constellation::qam4(),
        2 => Constellation::qam16(),
        _ => Constellation::qam64(),
    };
    let cfg = MbmConfig::new(4, 1, n_rf, constellation).unwrap();

    let bits: Vec<bool> = rest.iter().take(cfg.bits_per_user()).map(|x| x & 1 == 1).collect();
    match cfg.encode(&bits) {
        Ok(s) => assert_eq!(cfg.decode(s).unwrap(), bits),
        Err(_) => assert_ne!(bits.len(), cfg.bits_per_user()),
    }

    let s = MbmSymbol::new(*c as usize, *d as usize);
    if let Ok(bits) = cfg.decode(s) {
        assert_eq!(cfg.encode(&bits).unwrap(), s);
    }
});
