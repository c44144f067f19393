#![no_main]

use atomloc::cli::Cli;
use clap::Parser;
use libfuzzer_sys::fuzz_target;

// NUL-separated argument vectors.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args = std::iter::once("atomloc").chain(text.split('\0'));
    let _ = Cli::try_parse_from(args);
});
