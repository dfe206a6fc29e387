#![no_main]

use libfuzzer_sys::fuzz_target;
use replaylab::experiment::{parse_config, MapSource, TaskConfig};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(configs) = parse_config(text, None) {
            for cfg in &configs {
                // Validation may reject but must not panic. Skip configs that
                // would make it read an arbitrary file from disk.
                if !matches!(
                    &cfg.task,
                    TaskConfig::GridWorld {
                        map: MapSource::File(_),
                        ..
                    }
                ) {
                    let _ = cfg.validate();
                }
            }
        }
    }
});
