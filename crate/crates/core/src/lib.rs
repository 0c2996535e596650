//! Bounds on the contextual, noncontextual and quantum behaviour sets of
//! prepare-and-measure contextuality scenarios.
//!
//! * [`scenario`]: scenarios, behaviours, success metrics, named families.
//! * [`polytope`]: linear programs over the contextual and noncontextual polytopes.
//! * [`relax`]: moment-matrix SDP relaxations giving upper bounds on quantum values.
//! * [`seesaw`]: alternating SDPs giving explicit quantum realizations.
//! * [`multiparty`]: two measuring parties, monogamy curves and key rates.

pub mod error;
pub mod multiparty;
pub mod polytope;
pub mod relax;
pub mod scenario;
pub mod seesaw;

pub use error::{Error, Result};
