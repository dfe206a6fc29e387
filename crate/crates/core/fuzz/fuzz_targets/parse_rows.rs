#![no_main]

use libfuzzer_sys::fuzz_target;
use replaylab::experiment::{parse_rows, render_rows};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = parse_rows(text) {
            let once = render_rows(&rows);
            let again = parse_rows(&once).expect("rendered rows parse");
            assert_eq!(render_rows(&again), once);
        }
    }
});
