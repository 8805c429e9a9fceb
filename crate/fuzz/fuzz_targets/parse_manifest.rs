#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Err(e) = phmor_bench::parse_manifest(s) {
        assert!(e.line >= 1 && e.line <= s.lines().count().max(1) + 1);
    }
});
