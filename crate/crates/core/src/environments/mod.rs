//! Demand models, noise and ground truth.

pub mod audit;
pub mod model;
pub mod noise;
pub mod shapes;
pub mod truth;
pub mod zoo;

pub use model::{DemandModel, SelfSimParams, AUDIT_GRID};
pub use noise::{sample_demand, NoiseKind, NoiseSpec};
pub use shapes::{BumpG, Psi, Shape};
pub use truth::{optimal_price, GroundTruth, DEFAULT_TRUTH_GRID};
pub use zoo::{
    bump_c1, make_bump_g, make_bump_g_on, make_lowerbound_family, make_lowerbound_family_with,
    make_nonadaptive_pair, make_polynomial, make_power_selfsim, make_scaled_power, BUMP_DEFAULT_L,
    BUMP_D_MAX, BUMP_P_MIN,
};
