//! P1 finite elements for elliptic problems in divergence form
//!
//! ```text
//!     div(A(x) grad u) = div f   in (0,1)^2,      u = 0 on the boundary,
//! ```
//!
//! where the symmetric coefficient `A` is coercive but may be unbounded, with
//! entries of bounded mean oscillation (BMO). The coefficient is replaced by its
//! cell averages, the solution is sought in continuous piecewise linears, and the
//! resulting piecewise constant fluxes are studied through a discrete Hodge
//! decomposition.
//!
//! Modules:
//!
//! - [`mesh`]: structured triangulations of the unit square and their refinement.
//! - [`coeff`]: coefficient fields, cell-average projection, maximal functions and
//!   BMO diagnostics.
//! - [`fem`]: P1 spaces, assembly, conjugate gradients, `L^p` norms, the solver
//!   pipeline.
//! - [`hodge`]: discrete Hodge decomposition of piecewise constant vector fields,
//!   and the conjugate / flux decompositions built on top of it.
//! - [`harness`]: experiment configurations, refinement studies and CSV reports.

pub mod coeff;
pub mod error;
pub mod fem;
pub mod geom;
pub mod harness;
pub mod hodge;
pub mod mesh;
pub mod quadrature;

pub use error::{Error, Result};
pub use geom::{Mat2, Point, Vec2};
pub use mesh::Mesh;
