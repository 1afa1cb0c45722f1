//! Strategic layer: best responses, update dynamics, equilibrium checks and the
//! social optimum.

pub mod best_response;
pub mod contraction;
pub mod dynamics;
pub mod epsilon;
pub mod gradient;
pub mod projection;
pub mod social;
pub mod trace;

pub use best_response::{best_response, certify_equilibrium, BestResponse, BrOptions, NeCertificate};
pub use contraction::{contraction_report, ContractionReport};
pub use dynamics::{brd_run, default_initial_weights, greet_dynamics, AsyncEvent, AsyncSchedule, BrdOptions, DynamicsOptions};
pub use epsilon::{verify_epsilon_best_response, EpsilonReport};
pub use gradient::{evaluate, meets, served_utility, slice_gradient, slice_objective, social_gradient, social_objective, Evaluation};
pub use projection::project_capped_floor;
pub use social::{social_optimal, social_optimal_exact, SoOptions, SocialOptimum, StartStatus};
pub use trace::{step_norm, DynamicsTrace, Mode};
