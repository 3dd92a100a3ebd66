#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(range) = qig::scan::RangeSpec::parse(text) {
            // Parsed ranges must enumerate cleanly: right length, finite,
            // sorted, exact endpoints.
            if range.count <= 10_000 {
                let values = range.values();
                assert_eq!(values.len(), range.count);
                assert!(values.iter().all(|v| v.is_finite()));
                assert!(values.windows(2).all(|w| w[0] <= w[1]));
                assert_eq!(values[0], range.start);
                if range.count > 1 {
                    assert_eq!(*values.last().unwrap(), range.stop);
                }
            }
        }
    }
});
