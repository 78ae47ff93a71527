//! Exact verification that ex-post efficiency, equal treatment for all and
//! strategy-proofness pin down random serial dictatorship for small house
//! allocation problems.

pub mod axioms;
pub mod efficiency;
pub mod error;
pub mod exact;
pub mod mechanisms;
pub mod prefs;
pub mod verifier;

pub use error::{Error, Result};
pub use exact::Rational;
pub use mechanisms::{rsd, AssignmentMatrix, Cell, Mechanism, RandomSerialDictatorship};
pub use prefs::{canonicalize, parse_profile, AdjacentSwap, House, Profile, Ranking};
