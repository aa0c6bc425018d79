//! Shared fixtures for the benchmarks.

use mmnoma::SystemConfig;

/// Reference scenario at the given SNR.
pub fn reference(snr_db: f64) -> SystemConfig {
    SystemConfig::default().with_snr_db(snr_db)
}
