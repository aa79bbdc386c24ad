//! Exact and floating-point machinery for norm-variation estimates of
//! bilinear averages over the Cantor group `A^omega`.

pub mod abelian;
pub mod averages;
pub mod dadic;
pub mod dynamics;
pub mod error;
pub mod forms;
pub mod gen;
pub mod haar;
pub mod par;
pub mod scalar;
pub mod stepfn;
pub mod verify;

pub use abelian::{CharacterTable, Group, Rotation};
pub use dadic::{DadicInterval, DigitVector};
pub use error::{Error, Result};
pub use scalar::{Cyclotomic, Mode, Scalar};
pub use stepfn::StepFn2;
