//! Configuration, sweeps and validation for the `holstein` binary.

pub mod config;
pub mod sweep;
pub mod validate;

use holstein_core::circuit::MapOptions;
use holstein_core::{CircuitParams64, HolsteinParams64};

/// Circuit-to-model mapping, swappable so validation can be pointed at a
/// deliberately broken formula.
pub type MapFn = fn(&CircuitParams64, &MapOptions) -> holstein_core::Result<HolsteinParams64>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use holstein_core::Error as E;
    if err.downcast_ref::<config::ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<E>() {
        Some(
            E::ZeroDetuning(_)
            | E::DispersiveViolation { .. }
            | E::NonPositiveInput { .. }
            | E::InvalidParams(_)
            | E::SizeOverflow { .. }
            | E::DimensionMismatch { .. }
            | E::SectorMismatch(_),
        ) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}
