#![no_main]
use cotton_flow::cli::Report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Report::parse(text) {
        let back = Report::parse(&r.to_string()).expect("own output parses");
        assert_eq!(r.entries(), back.entries());
    }
});
