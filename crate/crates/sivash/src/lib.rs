//! Pseudo-spectral toolkit for diffusive Burgers equations with
//! low-wavenumber instability on periodic boxes (d = 1, 2).
//!
//! The equations treated here share the form
//!
//! ```text
//! ∂_t U + (U·∇)U = ΔU + TU + ∇G,      U = ∇φ,
//! ```
//!
//! where `T` is a Fourier multiplier with bounded symbol `m(k)` (zero at
//! k = 0) driving the low-wavenumber instability: the Burgers–Sivashinsky
//! equation (`m = α−1`), the Quasi-Steady equation of cellular flames
//! (`m = ακ²/(1+κ²)`) and, for simulation only, the Kuramoto–Sivashinsky
//! symbol (`m = ακ²(1−κ²)`, unbounded).
//!
//! Three equivalent formulations are implemented and cross-checked:
//! the primal gradient field `U`, the integrated scalar `φ` with its mean
//! evolved as a separate ODE, and the Cole–Hopf transformed `ψ = e^{−φ/2}`,
//! whose linear part has no spectral-gap obstruction. On top of the solver
//! sit dissipativity diagnostics (positive-part `α_p` functionals, absorbing
//! ball estimation), the Laplacian spectrum/gap machinery, and a numerical
//! inertial-manifold constructor for the prepared Cole–Hopf equation with
//! attraction and strong-squeezing verification.
//!
//! Fourier convention: fields are `f(x) = Σ_k c(k) e^{2πik·x/L}` and all
//! norms carry the explicit `L^d` Parseval factor so they match continuum
//! integrals over the box `Q = [−L/2, L/2]^d`.

pub mod colehopf;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod field;
pub mod grid;
pub mod ic;
pub mod io;
pub mod manifold;
pub mod models;
pub mod multiplier;
pub mod spectrum;
pub mod timestep;
pub mod vector;

pub use error::{Error, Result};
pub use field::{NormKind, SpectralField};
pub use grid::{DealiasRule, GridSpec};
pub use models::{Form, ModelSpec, ScalarState, State};
pub use multiplier::MultiplierSymbol;
pub use vector::VectorField;
