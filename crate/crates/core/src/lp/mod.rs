//! Linear programs over value-independent strategies, their dual
//! certificates, and a small dense simplex solver.

mod certificate;
mod primal;
mod program;
mod simplex;

pub use certificate::{
    strong_dual_certificate, verify_dual_feasibility, weak_dual_certificate, CertificateRef,
    CertificateSummary, ConstraintKind, ResidualReport, StrongDualCertificate, WeakDualCertificate,
    CSV_DUMP_CAP,
};
pub use primal::{
    build_primal, build_strong_primal, build_weak_primal, pair_count, pair_index, solve_primal,
    solve_strong_primal_by_seller_position, weak_primal_from_policy, PrimalKind, PrimalSolution,
    PRIMAL_SIZE_CAP,
};
pub use program::{Constraint, LinearProgram, Relation, Sense};
pub use simplex::{simplex_solve, LpSolution};
