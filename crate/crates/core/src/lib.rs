//! Multinomial-logit games on directed friendship networks.
//!
//! Players choose an action in `{0, ..., K}`; payoffs depend on own covariates
//! and on the share of friends taking each action. Under the usual
//! extreme-value shock assumption the Bayesian Nash equilibrium is the fixed
//! point of a logit best-response map, which is a contraction whenever the
//! interaction modulus [`PayoffParams::lambda`] is below one.
//!
//! The crate covers:
//!
//! * [`network`]: directed graphs, the circle and random Monte Carlo designs,
//!   h-hop neighbourhoods and induced subnetworks;
//! * [`game`]: best responses, the Jacobi equilibrium solver and the h-hop
//!   subnetwork approximation;
//! * [`simulate`]: equilibrium action draws and the replication harness;
//! * [`estimate`]: approximate maximum likelihood with implicit-function
//!   gradients, outer-product Fisher information and identification checks;
//! * [`npest`]: the window-matching nonparametric estimator on circles;
//! * [`io`]: CSV readers and writers for edges, covariates, outcomes and
//!   choice profiles.
//!
//! Player indices are 0-based throughout the library API. Files use 1-based
//! ids; the [`io`] module converts.

pub mod error;
pub mod estimate;
pub mod game;
pub mod io;
pub mod network;
pub mod npest;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use estimate::{
    amle, choose_h, fisher_info, ident_diagnostics, loglik_approx, score_approx, std_errors, AlphaBox, Dataset,
    EstimateResult, IdentDiagnostics, OptimizerSettings,
};
pub use game::{
    best_response, ndd_bound, solve_equilibrium, solve_equilibrium_from, solve_subnetwork, ChoiceProfile, Covariates,
    GameState, PayoffParams, SolveOptions, SolveReport,
};
pub use network::{generate_circle, generate_random, DirectedNetwork, Neighborhood, Subnetwork};
pub use npest::{np_estimate, np_estimate_all, NpConfig, NpEstimate};
pub use simulate::{draw_actions, run_montecarlo, CovariateDist, MCResult, MonteCarloDesign, NetworkKind, SimDraw};
