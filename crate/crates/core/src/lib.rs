//! Exact cohomology of generalized configuration spaces from finite
//! algebraic models.

pub mod acceptance;
pub mod ainfty;
pub mod celie;
pub mod cfcd;
pub mod exactalg;
pub mod partitions;
pub mod perm;
pub mod posetcx;
pub mod symfunc;
pub mod tcdga;
