//! Executable finite-scale models of partial dynamical systems.
//!
//! The crate turns the combinatorial side of partial group actions into
//! checkable computations: reduced-word arithmetic in free groups,
//! verification of partial representations and relation sets on explicit
//! matrices, truncated enumeration of relation spectra, Cuntz-Krieger
//! matrix analysis (condition (I), topological freeness, simplicity),
//! quasi-lattice order arithmetic with Nica covariance, and crossed-product
//! *-algebras over finite state spaces with their conditional expectation
//! and compression constructions.
//!
//! Exhaustive enumerations run data-parallel by default; the `parallel`
//! feature switches them between rayon and a sequential fallback, and every
//! parallel entry point has a `_seq` twin so both can be compared directly.

pub mod ck;
pub mod cross;
pub mod group;
pub mod matrix;
pub(crate) mod par;
pub mod pisom;
pub mod qlattice;
pub mod scalar;
pub mod spectrum;
pub mod words;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum PdsxError {
    /// Malformed textual or JSON input.
    #[error("parse error: {0}")]
    Parse(String),
    /// Structurally valid input violating a semantic precondition.
    #[error("{0}")]
    Semantic(String),
    /// Matrix dimension mismatch.
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Exact and floating scalars mixed in one computation.
    #[error("exact and floating entries cannot mix in one computation")]
    MixedMode,
    /// A result would need data outside the truncation ball.
    #[error("truncation overflow: {0}")]
    TruncationOverflow(String),
    /// A resource guard was exceeded; see [`Limits`].
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
}

impl PdsxError {
    /// Exit-code class used by the command-line surface:
    /// 2 parse, 3 semantic input, 4 resource guard.
    pub fn exit_class(&self) -> i32 {
        match self {
            PdsxError::Parse(_) => 2,
            PdsxError::GuardExceeded(_) => 4,
            _ => 3,
        }
    }
}

/// Size guards for the exhaustive operations. `Default` gives the desk-scale
/// caps; the CLI lifts them when `PDSX_GUARD_OVERRIDE` is set.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Cap on |B_k| for subset enumeration over a ball.
    pub max_ball_states: usize,
    /// Cap on |G| for exact finite-group spectra and dimension counts.
    pub max_group_order: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_ball_states: 25,
            max_group_order: 16,
        }
    }
}

impl Limits {
    pub fn unlimited() -> Self {
        Limits {
            max_ball_states: usize::MAX,
            max_group_order: usize::MAX,
        }
    }
}
