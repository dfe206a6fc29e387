#![no_main]

use libfuzzer_sys::fuzz_target;
use replaylab::approx::MlpParams;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(params) = MlpParams::parse_checkpoint(text) {
            let mut once = Vec::new();
            params.write_checkpoint(&mut once).unwrap();
            let once = String::from_utf8(once).unwrap();
            let again = MlpParams::parse_checkpoint(&once).expect("written checkpoint parses");
            let mut twice = Vec::new();
            again.write_checkpoint(&mut twice).unwrap();
            assert_eq!(once.as_bytes(), &twice[..]);
        }
    }
});
