//! Slicing game engine.
//!
//! A multi-tenant base-station network is shared between *slices*. Each slice
//! holds guaranteed per-station shares plus an excess budget, and places weights
//! (bids) on its users. The GREET rule turns bids into per-station resource
//! fractions; the share policy computes bids that protect minimum rates; the game
//! layer studies best responses and update dynamics; `radio` and `experiments`
//! drive everything from a desk-scale cellular simulation.
//!
//! Rates are carried in bits/s throughout. Shares are fractions of one station's
//! capacity, so a slice's overall share is measured in "stations".

pub mod allocation;
pub mod config;
pub mod error;
pub mod experiments;
pub mod game;
pub mod model;
pub mod policy;
pub mod radio;
pub mod rng;

pub use allocation::{
    gps_allocate, greet_allocate, greet_allocate_station, scpf_allocate, split_to_users,
    split_with_requirements, BidState, ScpfAllocation, SliceAllocation, StationAggregate,
    UserAllocation,
};
pub use error::{
    AllocationError, ConfigError, Error, ExperimentError, GameError, PolicyError, RadioError,
    ScenarioIssue, ValidationErrors,
};
pub use model::{
    check_well_dimensioned, overall_utility, user_utility, Grid, ScenarioSpec, SliceProfile,
    TrafficClass, UserRecord, Utility, UtilityParams, ValidatedScenario, WellDimensionedReport,
};
pub use policy::{
    build_aggregate_view, greet_share_round, greet_share_round_with, min_weights, AggregateView,
    DivergencePolicy, MinWeightProfile,
};
