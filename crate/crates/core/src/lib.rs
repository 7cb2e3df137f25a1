pub mod curvature;
pub mod diagnostics;
pub mod error;
pub mod fmt;
pub mod geom;
pub mod hierarchy;
pub mod ifs;
pub mod oracles;
pub mod raster;
pub mod words;

pub use error::{Error, Result};
