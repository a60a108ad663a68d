#![no_main]

use conik::{Cone, ConeDescriptor};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(desc) = serde_json::from_slice::<ConeDescriptor>(data) {
        let _ = Cone::new(desc);
    }
});
