//! Space-time cylinders, the De Giorgi alternatives and Hölder diagnostics.

pub mod constants;
pub mod cylinder;
pub mod dichotomy;
pub mod holder;

pub use constants::{
    compute_degiorgi_constants, default_theta, generate_iterative_scheme, DeGiorgiConstants, SchemePhase,
    SchemeStep, DEFAULT_ETA,
};
pub use cylinder::{
    check_cylinder_conditions, level_set_fraction, oscillation, ConditionCheck, ConditionReport, Cylinder,
    CylinderKind, LevelSense, OscillationReport,
};
pub use dichotomy::{degiorgi_dichotomy_check, Branch, DichotomyReport, DichotomyTolerance};
pub use holder::{
    fit_holder_exponent, holder_seminorm, parabolic_distance, HolderMode, HolderReport, HolderStatus,
    SpaceTimeBox,
};
