//! Zeeman spectra, field-insensitive points and rank-2 tensor shifts of
//! hyperfine clock transitions in trapped ions.

pub mod angular;
pub mod error;
pub mod search;
pub mod shifts;
pub mod species;
pub mod spectrum;
pub mod units;
pub mod zeeman;

pub use angular::{wigner3j, wigner6j, HalfInt};
pub use error::{Error, ErrorKind, Result};
pub use search::{
    find_insensitive_points, quadratic_coefficient, scan_species, InsensitivePoint, ScanFilters, ScanReport,
    SearchOptions, TransitionAnalysis,
};
pub use species::{ClockTransition, FineStructureLevel, IonSpecies, LevelId};
pub use spectrum::{LowerStateModel, TransitionSpectrum};
pub use zeeman::StateLabel;
