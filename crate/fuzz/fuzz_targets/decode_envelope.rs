#![no_main]

use coview_core::protocol::{decode, encode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(env) = decode(data) {
        let bytes = encode(&env);
        assert_eq!(decode(&bytes).unwrap(), env);
        assert_eq!(encode(&decode(&bytes).unwrap()), bytes);
    }
});
