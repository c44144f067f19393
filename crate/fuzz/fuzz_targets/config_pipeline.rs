#![no_main]

use atomloc::config::Config;
use atomloc::distributions::position_distribution;
use atomloc::model::Convention;
use libfuzzer_sys::fuzz_target;

// Parsed configs are pushed through resolution and a small position table.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(mut cfg) = Config::from_json(text) else {
        return;
    };
    cfg.grid.log2_points = cfg.grid.log2_points.min(10);
    let _ = cfg.regime_report();
    for convention in [Convention::PaperFigure, Convention::StrictK0] {
        let Ok(resolved) = cfg.resolve(convention) else {
            continue;
        };
        let Ok(wp) = resolved.wavepacket() else {
            continue;
        };
        if let Ok(table) = position_distribution(&wp, &resolved.interaction) {
            for c in table.present_columns() {
                assert!(table.column(c).unwrap().iter().all(|v| *v >= 0.0));
            }
        }
    }
});
