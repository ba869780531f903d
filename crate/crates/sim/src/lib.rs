//! Slotted Monte Carlo simulation of the sensor / MDC / AP network, plus the
//! independent oracles used to check the analytic model.

pub mod contact_trace;
pub mod queue_oracle;
pub mod run;
pub mod seed;
pub mod sinr_probe;
pub mod stats;
pub mod world;

pub use run::{replicate, run, RunReport, SimError, SimReport};
pub use world::{SimOptions, World};
