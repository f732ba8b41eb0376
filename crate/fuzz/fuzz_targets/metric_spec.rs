#![no_main]

use finsler_core::config::MetricSpec;
use finsler_core::norm::ConvexDomain;
use libfuzzer_sys::fuzz_target;

// Building and evaluating a parsed metric may fail but must never panic.
fuzz_target!(|data: &[u8]| {
    let Ok(source) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = MetricSpec::parse(source) else {
        return;
    };
    let domain = ConvexDomain::unit_ball(2);
    if let Ok(metric) = spec.build(&domain) {
        if let Ok(v) = metric.value(&[0.1, 0.0], &[1.0, 0.0]) {
            assert!(!v.is_nan(), "{spec:?}");
        }
    }
});
