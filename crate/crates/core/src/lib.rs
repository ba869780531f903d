pub mod geometry;
pub mod params;
pub mod quadrature;
pub mod contact;
pub mod queue;
pub mod coverage;
pub mod delay_energy;
pub mod report;
