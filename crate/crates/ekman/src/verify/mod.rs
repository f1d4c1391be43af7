//! Property checks and convergence studies built on the approximate
//! solution.

pub mod checks;
pub mod fit;
pub mod sample;

pub use checks::Check;
pub use fit::{fit_loglog, LogLogFit, StudyRow, StudyTable};
pub mod studies;
pub use studies::{run_study, StudyConfig, StudyKind};
pub mod appendix;
pub mod lemma;
pub mod suite;
pub use suite::{solver_physics, study_checks, verify_suite, PhysicsConfig, PhysicsReport, SuiteConfig};
