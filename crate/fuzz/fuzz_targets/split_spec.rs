#![no_main]

use libfuzzer_sys::fuzz_target;
use linfeat::dataset::SplitSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = SplitSpec::from_json(text) {
        for n in [0, 1, 50, 124] {
            let _ = spec.validate(n);
        }
    }
});
