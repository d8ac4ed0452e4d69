//! Analytical QoS model for prioritized multi-link Wi-Fi channel access:
//! a zone-aware collision fixed point, delay generating functions with
//! numerical tail inversion, a slot-accurate Monte Carlo reference
//! simulator, and a GA that tunes EDCA parameters and AC-to-link
//! assignment under delay-violation constraints.
//!
//! The [`guide`] module carries the narrative documentation; its chapters
//! double as the rendered book under `book/`.

pub mod airtime;
pub mod ccdf;
pub mod delay_gf;
pub mod fixed_point;
pub mod guide;
pub mod optimizer;
pub mod scenario;
pub mod sim;
pub mod zone;
