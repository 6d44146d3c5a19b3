//! Outage and rate-gain analysis of two-user NOMA pairing in a cell of `M`
//! users with ordered Rayleigh fading.
//!
//! * [`fnoma`]: fixed power split compared with orthogonal access.
//! * [`crnoma`]: power split chosen to protect the weak user's SINR.
//! * [`montecarlo`]: seeded, worker-invariant estimates of the same events.
//!
//! ```
//! use noma_pairing::fnoma::{p_sum_worse_exact, PairingConfig};
//!
//! let cfg = PairingConfig::new(5, 1, 2, 100.0, 0.2);
//! let p = p_sum_worse_exact(&cfg).unwrap();
//! assert!(p > 0.0 && p < 0.1);
//! ```

pub mod channel;
pub mod crnoma;
mod error;
pub mod fnoma;
pub mod montecarlo;
pub mod numerics;

pub use error::{Error, Result};
pub use fnoma::PairingConfig;
pub use montecarlo::{Event, EventSpec, ProbabilityEstimate};
