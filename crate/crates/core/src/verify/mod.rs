//! Numerical checks of the solution operators.

mod convergence;
mod fubini;
mod identities;
mod lp_probe;
mod oracle;
mod report;
mod residual;

pub use convergence::{solver_convergence, ConvergenceRow};
pub use fubini::{
    fubini_study_density, nested_integral, nested_integral_check, radial_integral, FubiniCheck, NestedRule,
};
pub use identities::{
    aleph_pullback_deviation, commutation_at, commutation_check, phi_commutation_check, sign_cancellation_exhaustive,
    theta_multiplier, twisted_pullback, Commutation, DeviationTable, SignCancellation,
};
pub use lp_probe::{
    cauchy_family_member, cauchy_ratio_probe, combination_coefficients, lp_bound_probe, m1_table, shrinking_bumps,
    shrinking_support_probe, CauchyProbe, DiscGrid, FamilyRatios, LpBoundProbe, LpEstimator, M1Row, ShrinkingProbe,
    FAMILY_STABILITY,
};
pub use oracle::{cauchy_pompeiu_check, indicator_brute_force, OracleTable};
pub use report::{Check, Comparison, LpRow, QuadratureStats, SolveReport, VerifyReport};
pub use residual::{residual_at, residual_check, ResidualOptions, ResidualRow, ResidualTable};
