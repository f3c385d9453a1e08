//! Statistical model checking for hybrid automata with nonlinear ODE modes.
//!
//! Trajectories are sampled from a Markov chain approximation of the
//! automaton: within each unit time step the mode switch is chosen with
//! probability proportional to how long each guard is enabled along the
//! flow, estimated from `J` random time points. Bounded LTL properties are
//! checked on the sampled trajectories and a sequential test decides whether
//! the property holds with probability one.

pub mod bltl;
pub mod expr;
pub mod flow;
pub mod model;
pub mod models;
pub mod oracle;
pub mod sampler;
pub mod smc;
