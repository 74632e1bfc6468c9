pub mod cli;
pub mod dynamics;
pub mod energy;
pub mod error;
pub mod field;
pub mod history;
pub mod kernel;
pub mod krylov;
pub mod moduli;
pub mod quadrature;
pub mod simulation;
pub mod state;
