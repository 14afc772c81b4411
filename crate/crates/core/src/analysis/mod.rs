//! Measurements on computed flows: line integrals, corner expansions,
//! far-field coefficients and the corner and sign censuses.

mod census;
mod contour;
mod corner;
mod farfield;

pub use census::{corner_census, sign_component_census, CensusEntry, CensusOptions, CensusVerdict, CornerCensus, SignComponents, Window};
pub use contour::{circulation, mass_flux, potential_increment, velocity_integral, Quadrature};
pub use corner::{
    a1_threshold, fit_coefficients, fit_corner, fit_corner_at, sign_attainment, velocity_exponent, CornerFit,
    CornerFitOptions, CornerReport, SignAttainment, MAX_FIT_CONDITION,
};
pub use farfield::{farfield_fit, farfield_fit_with_tolerance, LaurentFit, DEFAULT_TOLERANCE, MIN_RADIUS_FACTOR};
