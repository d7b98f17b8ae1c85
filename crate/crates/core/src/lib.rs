//! Front tracking for steady supersonic Euler flow above a free
//! characteristic boundary against still gas of prescribed pressure.

pub mod config;
pub mod error;
pub mod gas;
pub mod glimm;
pub mod numeric;
pub mod profile;
pub mod riemann;
pub mod run;
pub mod tracker;
pub mod verifier;
pub mod wave_curves;

pub use error::{Error, Result};
pub use gas::{Acoustic, GasModel, GasState};
