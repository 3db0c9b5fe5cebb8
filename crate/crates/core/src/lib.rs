//! Implicit solvers and intrinsic-scaling diagnostics for reaction-diffusion
//! equations `u_t = Δφ(u) + f(·, u)` whose diffusion degenerates at `u = 0`
//! (porous-medium type) and may blow up at `u = 1` (biofilm type).

pub mod barenblatt;
pub mod biofilm;
pub mod error;
pub mod estimates;
pub mod grid;
pub mod io;
pub mod nonlinearity;
pub mod numerics;
pub mod reaction;
pub mod regularity;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Axis, Field, Grid, Snapshot, Trajectory};
pub use nonlinearity::{
    fit_structural_constants, validate_hypotheses, Nonlinearity, NonlinearityKind,
    StructuralConstants, ValidationReport,
};
pub use reaction::{validate_growth_bound, ReactionContext, ReactionKind, ReactionTerm};
pub use solver::{advance_step, run_simulation, total_mass, BoundaryCondition, SolverConfig};
pub use barenblatt::Barenblatt;
pub use biofilm::{run_biofilm, BiofilmParams, BiofilmRun, BiofilmState};
pub use io::{parse_config, RunConfig, SnapshotFile};
pub use regularity::{Cylinder, DeGiorgiConstants};
