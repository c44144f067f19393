#![no_main]

use atomloc::config::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = Config::from_json(text) {
        let again = Config::from_json(&cfg.canonical_json()).expect("canonical form parses");
        assert_eq!(cfg.hash(), again.hash());
    }
});
