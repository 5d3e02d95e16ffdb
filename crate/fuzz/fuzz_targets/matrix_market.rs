#![no_main]

use giftplace::SparseSymMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = SparseSymMatrix::read_matrix_market(s) {
        assert!(m.is_symmetric(0.0));
        let mut out = Vec::new();
        m.write_matrix_market(&mut out).unwrap();
        let again =
            SparseSymMatrix::read_matrix_market(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(again, m);
    }
});
