//! Polynomial bases, regression solvers, L2 projection and the dyadic
//! self-similarity machinery.

pub mod approx;
pub mod basis;
pub mod jet;
pub mod projection;
pub mod quadrature;
pub mod regression;
pub mod selfsim;

pub use approx::{check_poly_approx, ApproxCheck};
pub use basis::{eval_poly, scaled_basis, Interval, PolyCoeffs};
pub use projection::{project_l2, project_l2_tol, sup_norm_diff};
pub use regression::{fit_least_squares, fit_ridge, RidgeAccumulator, RidgeFit};
pub use selfsim::{dyadic_intervals, selfsim_deficit, verify_selfsim, SelfSimReport};
