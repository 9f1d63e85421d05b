//! Front tracking and vanishing-viscosity solvers for the scalar conservation law
//!
//! ```text
//! u_t + [ θ̄(u_x) f(u) + (1 − θ̄(u_x)) g(u) ]_x = 0,      f < g,
//! ```
//!
//! where the flux switches from `f` on increasing regions to `g` on decreasing
//! regions. Local maxima are sinks and local minima are sources, which makes
//! extremum plateaus evolve by an ODE while every other wave is a classical
//! front of the piecewise affine flux `f_ν` or `g_ν`.
//!
//! The crate is organised bottom-up:
//!
//! * [`flux`]: flux pairs, polygonal sampling, envelopes, Liu admissibility and
//!   the smooth switch `θ_ε`.
//! * [`riemann`]: the two-flux Riemann solver.
//! * [`profile`]: piecewise constant profiles on the line or the circle.
//! * [`tracker`]: the event-driven front tracking engine.
//! * [`semigroup`]: quantization, runs, ν-ladders and periodic wrapping.
//! * [`viscous`]: explicit conservative scheme for the regularized equation.
//! * [`diagnostics`]: norms, masses, inequality checks and weak residuals.
//! * [`scenario`]: serializable configuration and the built-in catalogs.

// `!(a < b)` deliberately rejects NaN; index loops are clearer in the numerics.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod profile;
pub mod riemann;
pub mod scenario;
pub mod semigroup;
pub mod tracker;
pub mod viscous;

pub use error::{Error, Result};
pub use flux::{
    PiecewiseAffineFlux, Polynomial, SampledPair, SmoothFluxPair, SwitchFunction, Wave,
};
pub use profile::{Profile, Topology};
pub use riemann::{Family, Front};
pub use semigroup::{SemigroupRun, Sample};
pub use tracker::{Event, EventKind, TrackerConfig, TrackerState};
pub use viscous::ViscousField;
