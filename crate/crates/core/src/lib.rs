pub mod autom;
pub mod error;
pub mod groupdef;
pub mod hausdorff;
pub mod perm;
pub mod quotient;
pub mod reproduce;
pub mod rigidity;
pub mod tree;

pub use error::{Error, Result};
