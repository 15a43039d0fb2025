//! Shared fixtures for the benchmarks.

use std::path::PathBuf;

use fpl_core::Panel;

/// The bundled season, if present.
pub fn season_panel() -> Option<Panel> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/merged_gw_2023_24.csv");
    Panel::load(path, 38).ok()?.with_split_week(26).ok()
}
