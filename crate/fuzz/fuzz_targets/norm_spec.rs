#![no_main]

use finsler_core::config::NormSpec;
use libfuzzer_sys::fuzz_target;

// Any norm that builds must be positive and finite off the origin.
fuzz_target!(|data: &[u8]| {
    let Ok(source) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = NormSpec::parse(source) else {
        return;
    };
    for dim in 2..=4 {
        if let Ok(norm) = spec.build(dim) {
            let mut y = vec![0.0; dim];
            y[0] = 1.0;
            let v = norm.value(&y).expect("norm evaluates off the origin");
            assert!(v.is_finite() && v > 0.0, "{spec:?}: {v}");
        }
    }
});
