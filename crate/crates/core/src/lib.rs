pub mod bounds;
pub mod foliation_zoo;
pub mod model_ode;
pub mod psi_kernel;
pub mod report;
pub mod sl_engine;
