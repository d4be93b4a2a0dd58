//! Orthonormal polynomial systems for the marginal laws.
//!
//! Every measure gets a monic three-term recurrence, either from a closed form
//! (`FastPath`) or from its exact rational moments (`Oracle`). Evaluation,
//! leading coefficients and Gauss rules work off the stored coefficients.
//!
//! The constant c_n attached to degree n is (β_1 ⋯ β_n)/(n!)², the squared norm
//! of the monic polynomial over (n!)². For the gamma and hyperbolic families
//! with shape q this is (q)_n/n! up to a factor that does not depend on q.

mod measure;
mod moments;
mod recurrence;

pub use measure::{sample_poisson, MeasureSpec, PolyFamily, Support, SupportKind};
pub use moments::{exact_moments, moments, moments_by_quadrature, MomentSequence, MAX_MOMENT_ORDER};
pub use recurrence::{
    exact_gram_is_identity, exact_masses, exact_monic_gram, extended_recurrence, fast_path,
    fast_path_exact, oracle_exact, recurrence, GaussRule, LeadingCoeff, RecurrenceCoeffs,
    RecurrenceMode, MAX_DEGREE, MAX_EXTENDED_DEGREE,
};
