#![no_main]

use coview_core::session::{decode_server_message, encode_server_message};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(msg) = decode_server_message(data) {
        let bytes = encode_server_message(&msg, 0);
        assert_eq!(decode_server_message(&bytes).unwrap(), msg);
    }
});
