pub mod bundle;
pub mod config;
pub mod error;
pub mod fit;
pub mod flow;
pub mod functionals;
pub mod holonomy;
pub mod mat2;
pub mod runner;
pub mod scenario;
pub mod snapshot;
pub mod spd;
pub mod stencil;
pub mod verify;
pub mod warped;

pub use error::{FlowError, Result};
