pub mod error;
pub mod ode;
pub mod sibuya;
pub mod spectral;
pub mod rootfinder;
pub mod raysystem;
