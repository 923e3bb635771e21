//! Coupled adoption/opinion contagion on networks: simulation, stability
//! certificates and Monte-Carlo basin mapping.

pub mod analysis;
pub mod dynamics;
pub mod experiments;
pub mod model;
pub mod numerics;
pub mod serial;
