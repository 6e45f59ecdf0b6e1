#![no_main]

use libfuzzer_sys::fuzz_target;
use linfeat::dataset::{parse_csv, to_csv_string, Layout};

// First byte picks the layout; the rest is the document.
fuzz_target!(|data: &[u8]| {
    let Some((&sel, rest)) = data.split_first() else {
        return;
    };
    let Ok(text) = std::str::from_utf8(rest) else {
        return;
    };
    let layout = if sel & 1 == 0 {
        Layout::RowsAreSamples
    } else {
        Layout::ColumnsAreSamples
    };
    if let Ok(ds) = parse_csv(text, layout) {
        let back = parse_csv(&to_csv_string(&ds), Layout::RowsAreSamples)
            .expect("written CSV must parse");
        assert_eq!(back.values(), ds.values());
        assert_eq!(back.grid(), ds.grid());
    }
});
