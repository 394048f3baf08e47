#![no_main]
use cotton_flow::cli::config::{self, ExperimentConfig, FixedPointScan, HoravaScan, VerifyConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = config::parse(text) else { return };
    // typed extraction must reject, never panic
    let _ = ExperimentConfig::from_config(&cfg);
    let _ = VerifyConfig::from_config(&cfg);
    let _ = HoravaScan::from_config(&cfg);
    let _ = FixedPointScan::from_config(&cfg);
    for section in cfg.section_names() {
        let _ = cfg.list(section, "g");
    }
    if let Some(a) = config::parse_alpha(text.trim()) {
        assert_eq!(config::parse_alpha(&config::format_alpha(&a)), Some(a));
    }
});
