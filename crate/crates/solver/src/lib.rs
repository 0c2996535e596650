//! Conic optimisation layer: a sparse program model covering LPs and
//! (complex) semidefinite programs, and a backend that solves it.
//!
//! ```
//! use ctxwb_solver::{ConicProgram, Relation, Sense, SolverOptions, solve};
//!
//! // max 2 Re G[0][1]  s.t.  G >= 0, diag(G) = 1
//! let mut p = ConicProgram::new(Sense::Max);
//! let g = p.add_symmetric(2, None);
//! for i in 0..2 {
//!     p.add_constraint(ctxwb_solver::LinExpr::var(p.sym(g, i, i)), Relation::Eq, 1.0);
//! }
//! p.objective.add_term(p.sym(g, 0, 1), 2.0);
//! let sol = solve(&p, &SolverOptions::default()).unwrap();
//! assert!((sol.objective - 2.0).abs() < 1e-6);
//! ```

// Links the system OpenBLAS used by the dense PSD kernels.
extern crate openblas_src;

mod backend;
mod embed;
mod error;
mod presolve;
mod program;
mod solution;

pub use backend::{backend_from_env, solve, Backend, ClarabelBackend, SolverOptions, BACKEND_ENV};
pub use embed::{embed_hermitian, embed_matrix, unembed_matrix, Coupling, EmbeddedEntry, HermitianEmbedding};
pub use error::SolverError;
pub use program::{Block, BlockKind, ConicProgram, Constraint, LinExpr, Part, Relation, Sense, Var};
pub use solution::{Certificate, Residuals, Solution, Status};
