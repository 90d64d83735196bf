pub mod ball;
pub mod bounds;
pub mod error;
pub mod exact_linear;
pub mod heights;
pub mod interval;
pub mod modular;
pub mod quadratic;
pub mod search;
pub mod special_geometry;

pub use error::{Error, Result};
