pub mod algebra;
pub mod constraint;
pub mod darboux;
pub mod model;
pub mod numeric;
pub mod reduction;
pub mod spectrum;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
