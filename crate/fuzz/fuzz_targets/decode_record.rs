#![no_main]

use coview_core::store::{decode_record, encode_record};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(record) = decode_record(data) {
        assert_eq!(decode_record(&encode_record(&record)).unwrap(), record);
    }
});
