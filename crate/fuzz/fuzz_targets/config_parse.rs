#![no_main]

use finsler_core::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

// Any accepted config must survive a serialize/parse round trip unchanged.
fuzz_target!(|data: &[u8]| {
    let Ok(source) = std::str::from_utf8(data) else {
        return;
    };
    match ExperimentConfig::parse(source) {
        Ok(exp) => {
            let again = ExperimentConfig::parse(&exp.config.to_toml()).expect("round trip parses");
            assert_eq!(again.config, exp.config);
        }
        Err(e) => assert!(!e.to_string().is_empty()),
    }
});
