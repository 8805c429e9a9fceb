#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(cfg) = phmor_bench::parse_config(s) {
        let _ = cfg.validate();
    }
});
