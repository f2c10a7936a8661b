#![no_main]

use libfuzzer_sys::fuzz_target;
use quartic::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let again = ExperimentConfig::parse(&cfg.to_text()).expect("serialized config parses");
        assert_eq!(again.to_text(), cfg.to_text());
        assert_eq!(again.hash(), cfg.hash());
        let _ = cfg.run.validate();
    }
});
