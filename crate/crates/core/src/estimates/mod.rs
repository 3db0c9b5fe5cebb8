//! Integral inequalities for truncations of computed solutions, and the
//! auxiliary lemmas behind the De Giorgi iteration.

pub mod cutoff;
pub mod energy;
pub mod lemmas;

pub use cutoff::{CutoffBounds, CutoffSample, CutoffSpec};
pub use energy::{verify_log_estimate, verify_lower_energy, verify_upper_energy, EstimateReport, GrowthBound};
pub use lemmas::{fast_geometric_bound, poincare_ratio, v2_embedding_ratio, GeometricSequence};
