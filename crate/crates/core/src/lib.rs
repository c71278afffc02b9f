pub mod cli;
pub mod cmpc;
pub mod control;
pub mod dmpc;
pub mod error;
pub mod linalg;
pub mod linear;
pub mod matrix_text;
pub mod plant;
pub mod qp;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};
