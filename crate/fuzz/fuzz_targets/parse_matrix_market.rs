#![no_main]

use libfuzzer_sys::fuzz_target;
use phmor_bench::mtx::{parse_matrix_market, write_matrix_market, MtxError, MtxFormat, MtxHeader, MtxSymmetry};

fuzz_target!(|s: &str| {
    let Ok(m) = parse_matrix_market(s, 64) else { return };
    assert!(m.nrows() <= 64 && m.ncols() <= 64);
    // anything we accept must survive a write/read round trip
    let header = MtxHeader {
        format: MtxFormat::Coordinate,
        symmetry: MtxSymmetry::General,
    };
    match parse_matrix_market(&write_matrix_market(&m, header), 64) {
        Ok(back) => assert_eq!(back, m),
        Err(MtxError::Parse(e)) => panic!("round trip failed: {e}"),
        Err(e) => panic!("{e:?}"),
    }
});
