#![no_main]

use libfuzzer_sys::fuzz_target;
use replaylab::env::{grid_optimal_steps, parse_grid_map};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_grid_map(text) {
            // Parsing already checked reachability, so the oracle must agree.
            let steps = grid_optimal_steps(&spec).expect("parsed map has a reachable goal");
            assert!(steps >= 1 && steps < spec.cell_count());
        }
    }
});
