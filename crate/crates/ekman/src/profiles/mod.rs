//! Closed-form terms of the approximate solution and the limit profile.

pub mod ansatz;
pub mod cutoff;
pub mod data;

pub use ansatz::{Amp, Ansatz, AnsatzParams, Column, FrameVec, Layer, Mutation, Term, TermSet};
pub use cutoff::{chi, chi_prime, CutoffK};
pub use data::{InitialSwirl, SwirlFamily};
