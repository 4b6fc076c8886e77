pub mod asymptotics;
pub mod chebyshev;
pub mod cli;
pub mod forward;
pub mod inverse;
pub mod jet;
pub mod kernel;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod zeros;
