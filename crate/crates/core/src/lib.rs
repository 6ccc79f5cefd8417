//! Lie point symmetry analysis of the Sharma-Taneja-Mittal nonlinear
//! Fokker-Planck equation
//!
//! ```text
//! u_t = d/dx (x u) + Omega d^2/dx^2 [Lambda(u)]
//! Lambda(u) = (r+k)/(2k) u^(1+r+k) - (r-k)/(2k) u^(1+r-k)
//! ```
//!
//! The crate classifies parameter pairs (r, k) by the symmetry algebra the
//! equation admits, builds the admitted generators exactly, computes
//! commutator tables and adjoint representations, normalizes algebra
//! elements onto an optimal system of one-dimensional subalgebras, carries
//! out the corresponding symmetry reductions to ODEs, and checks everything
//! numerically: reduced solutions are lifted back to the PDE and the
//! residual is measured on a grid.
//!
//! Module layout:
//! - [`symexpr`]: exact-rational symbolic expressions with canonical forms
//! - [`jets`]: total derivatives, prolongation, determining equations
//! - [`family`]: the equation family, parameter classification, generators
//! - [`liealg`]: structure constants, adjoint maps, optimal-system
//!   normalization
//! - [`reduction`]: invariant ansatzes and the reduced ODE catalog
//! - [`numerics`]: ODE integration, grid evolution, residual measurement
//! - [`verify`]: the findings report tying computed results to expected ones

pub mod family;
pub mod jets;
pub mod liealg;
pub mod numerics;
pub mod reduction;
pub mod symexpr;
pub mod verify;

/// Library version, recorded in run manifests by downstream tools.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use family::{CaseFamily, CaseId, GeneratorCatalog, Part, PdeInstance};
pub use jets::{EvolutionPde, ProlongedCoeffs, VectorField};
pub use liealg::{
    adjoint_move, bracket, expand_in_basis, normalize_element, AdjointMatrix, AlgebraElement,
    LieAlgError, Move, Normalization, NormalizeError, RepLabel, StructureConstants,
};
pub use numerics::{
    build_solution, evolve_pde, integrate_ode, pde_residual, residual_convergence,
    residual_field, BuildError, EvolveError, EvolveOptions, EvolveReport, GridError, GridField,
    LevelNorms, OdeError, OdeProblem, OdeSolution, ResidualError, ResidualReport, StopReason,
};
pub use reduction::{
    catalog, invariants_of, recipe, standard_test_functions, stationary_multiplier, theta_for,
    verify_reduction, verify_stationary_symbolic, Deriv2, Invariants, OdeRhsError,
    ReductionError, ReductionRecipe, ReductionReport, TestFunction, VerifyError,
};
pub use symexpr::{Bindings, Expr, JetVar, NumBindings, Rat, Var};
pub use verify::{
    expected_adjoint, expected_commutators, optimal_system_representatives, reduction_schedule,
    verify_all, CheckResult, Finding, Severity, VerifyFilter, VerifyReport,
};
