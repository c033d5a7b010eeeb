#![no_main]

use coview_core::sim::replay_transcript_str;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = replay_transcript_str(text);
    }
});
