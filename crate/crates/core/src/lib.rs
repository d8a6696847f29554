pub mod error;
pub mod herglotz;
pub mod ivp;
pub mod mfun;
pub mod models;
pub mod quad;
pub mod singular;
pub mod specialfn;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
