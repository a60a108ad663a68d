#![no_main]

use conik::ipm::ConicProgram;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = ConicProgram::from_json(text);
});
