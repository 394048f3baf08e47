#![no_main]
use cotton_flow::cli::csv::{read_trajectory, trajectory_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(rows) = read_trajectory(text) else { return };
    if rows.windows(2).any(|w| !(w[1].f_cs - w[0].f_cs).is_finite()) {
        return;
    }
    let again = read_trajectory(&trajectory_to_string(&rows, 1)).expect("own output parses");
    assert_eq!(rows.len(), again.len());
    for (a, b) in rows.iter().zip(&again) {
        assert_eq!(a.t.to_bits(), b.t.to_bits());
        assert_eq!(a.g, b.g);
    }
});
